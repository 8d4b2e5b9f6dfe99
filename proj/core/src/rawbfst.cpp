#include "rawbfst/rawbfst.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rawbfst/error.hpp"
#include "rawbfst/interpolator.hpp"
#include "rawbfst/numkernel.hpp"
#include "rawbfst/parallel.hpp"

namespace rawbfst {

// --- EulerModel ------------------------------------------------------------

EulerModel EulerModel::constant(Eigen::VectorXd drift, Eigen::MatrixXd diffusion, double c1f, double c2f) {
  const auto dim = drift.size();
  if (dim < 1 || diffusion.rows() != dim || diffusion.cols() != dim) {
    throw ConfigError("EulerModel: drift must have length D and diffusion must be D x D");
  }
  if (!(c1f > 0.0) || !(c2f > 0.0)) throw ConfigError("EulerModel: Aronson constants must be positive");
  EulerModel m;
  m.dim_ = static_cast<int>(dim);
  m.c1f_ = c1f;
  m.c2f_ = c2f;
  m.const_drift_ = std::move(drift);
  m.const_diffusion_ = std::move(diffusion);
  return m;
}

EulerModel EulerModel::brownian(int dim, double c1f, double c2f) {
  if (dim < 1) throw ConfigError("EulerModel: dimension must be >= 1");
  return constant(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim), c1f, c2f);
}

EulerModel EulerModel::general(int dim, Drift drift, Diffusion diffusion, double c1f, double c2f) {
  if (dim < 1) throw ConfigError("EulerModel: dimension must be >= 1");
  if (!drift || !diffusion) throw ConfigError("EulerModel: drift and diffusion must be callable");
  if (!(c1f > 0.0) || !(c2f > 0.0)) throw ConfigError("EulerModel: Aronson constants must be positive");
  EulerModel m;
  m.dim_ = dim;
  m.c1f_ = c1f;
  m.c2f_ = c2f;
  m.drift_fn_ = std::move(drift);
  m.diffusion_fn_ = std::move(diffusion);
  return m;
}

EulerModel EulerModel::with_c2f(double c2f) const {
  if (!(c2f > 0.0)) throw ConfigError("EulerModel: C2f must be positive");
  EulerModel m = *this;
  m.c2f_ = c2f;
  return m;
}

Eigen::VectorXd EulerModel::drift(const Eigen::VectorXd& x) const {
  return const_drift_ ? *const_drift_ : drift_fn_(x);
}

Eigen::MatrixXd EulerModel::diffusion(const Eigen::VectorXd& x) const {
  return const_diffusion_ ? *const_diffusion_ : diffusion_fn_(x);
}

// --- configuration ---------------------------------------------------------

double c_star_paths(int max_degree, int dim) {
  double sum = 0.0;
  for (const auto& j : poly::enumerate_multi_indices(dim, max_degree)) {
    double prod = 1.0;
    for (int v : j.entries()) prod *= 2.0 * v + 1.0;
    sum += prod;
  }
  return 2.0 / 3.0 + 8.0 / 3.0 * sum;
}

double tau_upper_bound(int max_degree, int dim, double c1_paths) {
  return 1.0 - std::sqrt(c_star_paths(max_degree, dim) / c1_paths);
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < std::exp(-1.0))) {
    std::ostringstream os;
    os << "step size Delta = " << delta << " must lie in (0, 1/e) for the truncation level r2 to be defined";
    throw ConfigError(os.str());
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

void resolve_geometry(RawbfstConfig& cfg) {
  cfg.h = cfg.c_cube * std::pow(cfg.delta, cfg.gamma_cube);
  const double alpha = cfg.c1_trunc * std::pow(cfg.delta, cfg.gamma1_trunc);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("tail mass c1_trunc * Delta^gamma1_trunc must lie in (0,1), got " + std::to_string(alpha));
  }
  cfg.r1 = std::sqrt(cfg.c2f * num::chi2_quantile(cfg.dim, alpha));
  const double arg = cfg.c2_trunc * std::pow(cfg.delta, -cfg.gamma2_trunc) * std::log(1.0 / cfg.delta);
  if (!(arg > 1.0)) throw ConfigError("r2 undefined: c2_trunc * Delta^-gamma2 * log(1/Delta) must exceed 1");
  cfg.r2 = std::sqrt(2.0 * std::log(arg));
  cfg.basis_size = static_cast<std::size_t>(poly::binomial(cfg.dim + cfg.max_degree, cfg.dim));
}

RawbfstConfig derive_config(const RateRecipe& recipe) {
  check_delta(recipe.delta);
  if (recipe.rho < 1) throw ConfigError("rho must be a positive integer");
  if (recipe.iota.dim() < 1) throw ConfigError("iota must have at least one coordinate");
  check_positive(recipe.c_cube, "c_cube");
  check_positive(recipe.c1_trunc, "c1_trunc");
  check_positive(recipe.c2_trunc, "c2_trunc");
  check_positive(recipe.c2_paths, "c2_paths");
  check_positive(recipe.c2f, "C2f");

  RawbfstConfig cfg;
  cfg.dim = static_cast<int>(recipe.iota.dim());
  cfg.delta = recipe.delta;
  cfg.rho = recipe.rho;
  cfg.iota = recipe.iota;
  cfg.max_degree = recipe.max_degree;
  const int order = recipe.iota.abs();
  if (recipe.max_degree < order + recipe.rho) {
    throw ConfigError("polynomial degree condition violated: need Q >= |iota|_1 + rho = " +
                      std::to_string(order + recipe.rho) + ", got Q = " + std::to_string(recipe.max_degree));
  }
  const double c_star = c_star_paths(recipe.max_degree, cfg.dim);
  if (!(recipe.c1_paths > c_star)) {
    throw ConfigError("path constant condition violated: need c1_paths > c*_paths(Q,D) = " + std::to_string(c_star));
  }
  const double tau_max = 1.0 - std::sqrt(c_star / recipe.c1_paths);
  if (!(recipe.tau > 0.0 && recipe.tau < tau_max)) {
    throw ConfigError("threshold condition violated: need 0 < tau < 1 - sqrt(c*_paths / c1_paths) = " +
                      std::to_string(tau_max));
  }

  cfg.tau = recipe.tau;
  cfg.c_cube = recipe.c_cube;
  cfg.c1_trunc = recipe.c1_trunc;
  cfg.c2_trunc = recipe.c2_trunc;
  cfg.c1_paths = recipe.c1_paths;
  cfg.c2_paths = recipe.c2_paths;
  cfg.c2f = recipe.c2f;
  cfg.gamma_cube = static_cast<double>(recipe.rho + order) / (2.0 * (recipe.max_degree + 1));
  cfg.gamma1_trunc = recipe.rho;
  cfg.gamma2_trunc = 1.5 * (order + recipe.rho);

  const double log_term = std::log(recipe.c2_paths / recipe.delta);
  if (!(log_term > 0.0)) throw ConfigError("path count undefined: need c2_paths / Delta > 1");
  cfg.paths = static_cast<std::size_t>(std::ceil(recipe.rho * recipe.c1_paths * log_term));
  resolve_geometry(cfg);
  return cfg;
}

RawbfstConfig make_config(const ExplicitRecipe& recipe) {
  check_delta(recipe.delta);
  if (recipe.dim < 1) throw ConfigError("dimension must be >= 1");
  if (recipe.max_degree < 0) throw ConfigError("Q must be >= 0");
  check_positive(recipe.gamma_cube, "gamma_cube");
  check_positive(recipe.gamma1_trunc, "gamma1_trunc");
  check_positive(recipe.gamma2_trunc, "gamma2_trunc");
  check_positive(recipe.c_cube, "c_cube");
  check_positive(recipe.c1_trunc, "c1_trunc");
  check_positive(recipe.c2_trunc, "c2_trunc");
  check_positive(recipe.tau, "tau");
  check_positive(recipe.c2f, "C2f");
  if (recipe.paths < 1) throw ConfigError("path count L must be >= 1");

  RawbfstConfig cfg;
  cfg.dim = recipe.dim;
  cfg.delta = recipe.delta;
  cfg.iota = poly::MultiIndex(static_cast<std::size_t>(recipe.dim));
  cfg.max_degree = recipe.max_degree;
  cfg.tau = recipe.tau;
  cfg.c_cube = recipe.c_cube;
  cfg.c1_trunc = recipe.c1_trunc;
  cfg.c2_trunc = recipe.c2_trunc;
  cfg.gamma_cube = recipe.gamma_cube;
  cfg.gamma1_trunc = recipe.gamma1_trunc;
  cfg.gamma2_trunc = recipe.gamma2_trunc;
  cfg.c2f = recipe.c2f;
  cfg.paths = recipe.paths;
  resolve_geometry(cfg);
  return cfg;
}

// --- sampling --------------------------------------------------------------

CubeSamples simulate_cube_samples(const EulerModel& model, const CubicPartition& partition, std::size_t ordinal,
                                  const RawbfstConfig& cfg, PhiloxStream& rng) {
  const auto D = static_cast<Eigen::Index>(cfg.dim);
  if (model.dim() != cfg.dim || partition.dim() != cfg.dim) throw ConfigError("simulate_cube_samples: dimension mismatch");
  const auto L = static_cast<Eigen::Index>(cfg.paths);
  const double sqrt_delta = std::sqrt(cfg.delta);

  CubeSamples out{Eigen::MatrixXd(L, D), Eigen::MatrixXd(L, D)};
  Eigen::VectorXd u(D);
  Eigen::VectorXd xi(D);
  const bool constant = model.has_constant_coefficients();
  Eigen::VectorXd b;
  Eigen::MatrixXd sigma;
  if (constant) {
    b = model.drift(u);
    sigma = model.diffusion(u);
  }
  for (Eigen::Index l = 0; l < L; ++l) {
    partition.sample_uniform(ordinal, rng, std::span<double>(u.data(), static_cast<std::size_t>(D)));
    for (Eigen::Index d = 0; d < D; ++d) xi(d) = std::clamp(rng.normal(), -cfg.r2, cfg.r2);
    if (!constant) {
      b = model.drift(u);
      sigma = model.diffusion(u);
    }
    out.start.row(l) = u.transpose();
    out.end.row(l) = (u + b * cfg.delta + sigma * (sqrt_delta * xi)).transpose();
  }
  return out;
}

// --- fit -------------------------------------------------------------------

Estimator fit(const EulerModel& model, const Target& y, const RawbfstConfig& cfg, std::uint64_t seed,
              std::uint64_t stream_tag) {
  if (model.dim() != cfg.dim) throw ConfigError("fit: model dimension does not match configuration");
  if (cfg.paths < 1 || !(cfg.h > 0.0)) throw ConfigError("fit: configuration has not been resolved");

  Estimator est;
  est.cfg_ = cfg;
  est.model_ = model;
  est.partition_ = std::make_shared<const CubicPartition>(CubicPartition::build(cfg.dim, cfg.h, cfg.r1));
  est.basis_ = poly::enumerate_multi_indices(cfg.dim, cfg.max_degree);

  std::vector<poly::MultivariatePolynomial> basis_polys;
  basis_polys.reserve(est.basis_.size());
  for (const auto& j : est.basis_) basis_polys.push_back(poly::tensor_legendre(j));

  const auto& part = *est.partition_;
  const std::size_t cubes = part.size();
  est.fits_.resize(cubes);
  est.local_u_.assign(cubes, poly::MultivariatePolynomial(static_cast<std::size_t>(cfg.dim)));
  std::vector<std::exception_ptr> errors(cubes);

  const auto K = static_cast<Eigen::Index>(est.basis_.size());
  const double half = 0.5 * cfg.h;

#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cubes); ++c) {
    const auto ord = static_cast<std::size_t>(c);
    try {
      auto rng = make_stream(seed, StreamNamespace::kProduction, stream_tag, hash_index(part.index(ord)));
      const CubeSamples samples = simulate_cube_samples(model, part, ord, cfg, rng);
      const auto center = part.center(ord);
      const auto L = samples.end.rows();
      Eigen::MatrixXd A(L, K);
      Eigen::VectorXd Y(L);
      std::vector<double> x2(static_cast<std::size_t>(cfg.dim));
      std::vector<double> t(static_cast<std::size_t>(cfg.dim));
      std::vector<double> row(static_cast<std::size_t>(K));
      for (Eigen::Index l = 0; l < L; ++l) {
        for (std::size_t d = 0; d < x2.size(); ++d) {
          x2[d] = samples.end(l, static_cast<Eigen::Index>(d));
          t[d] = (x2[d] - center[d]) / half;
        }
        tensor_legendre_row(est.basis_, t, cfg.max_degree, row);
        for (Eigen::Index k = 0; k < K; ++k) A(l, k) = row[static_cast<std::size_t>(k)];
        Y(l) = y(x2);
      }
      est.fits_[ord] = fit_truncated(A, Y, cfg.tau);
      if (!est.fits_[ord].truncated) {
        poly::MultivariatePolynomial local(static_cast<std::size_t>(cfg.dim));
        for (Eigen::Index k = 0; k < K; ++k) local += basis_polys[static_cast<std::size_t>(k)] * est.fits_[ord].coeffs(k);
        est.local_u_[ord] = std::move(local);
      }
    } catch (...) {
      errors[ord] = std::current_exception();
    }
  }

  for (std::size_t ord = 0; ord < cubes; ++ord) {
    if (!errors[ord]) continue;
    std::ostringstream where;
    where << "cube " << ord << " (index";
    for (int v : part.index(ord)) where << ' ' << v;
    where << "): ";
    try {
      std::rethrow_exception(errors[ord]);
    } catch (const ConfigError& e) {
      throw ConfigError(where.str() + e.what());
    } catch (const std::exception& e) {
      throw NumericalError(where.str() + e.what());
    }
  }
  return est;
}

// --- evaluation ------------------------------------------------------------

std::size_t Estimator::truncated_cubes() const {
  return static_cast<std::size_t>(
      std::count_if(fits_.begin(), fits_.end(), [](const CubeRegression& f) { return f.truncated; }));
}

namespace {

num::TruncatedMomentTable moments_for(const poly::MultivariatePolynomial& p, double r) {
  int max_exp = 0;
  for (std::size_t d = 0; d < p.dim(); ++d) max_exp = std::max(max_exp, p.degree_in(d));
  return num::truncated_moments(max_exp + (max_exp % 2), r);
}

// Places the variables of p at positions [offset, offset + dim(p)) of a total_dim-variate polynomial.
poly::MultivariatePolynomial embed(const poly::MultivariatePolynomial& p, std::size_t total_dim, std::size_t offset) {
  poly::MultivariatePolynomial out(total_dim);
  poly::MultiIndex e(total_dim);
  for (const auto& [pe, c] : p.terms()) {
    for (std::size_t d = 0; d < p.dim(); ++d) e[offset + d] = pe[d];
    out.add_term(e, c);
  }
  return out;
}

}  // namespace

double Estimator::evaluate(const poly::MultiIndex& iota, std::span<const double> x) const {
  if (iota.dim() != static_cast<std::size_t>(cfg_.dim)) throw ConfigError("evaluate: iota dimension mismatch");
  const auto ord = partition_->locate(x);
  if (!ord || fits_[*ord].truncated) return 0.0;

  const auto D = static_cast<Eigen::Index>(cfg_.dim);
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), D);
  const auto center = partition_->center(*ord);
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(center.data(), D);
  const double half = 0.5 * cfg_.h;

  const Eigen::VectorXd shift = (xv + model_.drift(xv) * cfg_.delta - a) / half;
  const Eigen::MatrixXd scale = model_.diffusion(xv) * (std::sqrt(cfg_.delta) / half);
  const auto in_w = poly::affine_substitute(local_u_[*ord], shift, scale);
  const auto integrand = poly::poly_mul(in_w, poly::scaled_hermite_weight_poly(iota, cfg_.delta));
  return poly::expect_truncated_gaussian(integrand, moments_for(integrand, cfg_.r2));
}

double Estimator::regression_value(std::span<const double> x1, std::span<const double> x2) const {
  const auto ord = partition_->locate(x1);
  if (!ord || fits_[*ord].truncated) return 0.0;
  const auto center = partition_->center(*ord);
  std::vector<double> u(x2.size());
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = (x2[d] - center[d]) / (0.5 * cfg_.h);
  std::vector<double> row(basis_.size());
  tensor_legendre_row(basis_, u, cfg_.max_degree, row);
  const auto& alpha = fits_[*ord].coeffs;
  double acc = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) acc += alpha(static_cast<Eigen::Index>(k)) * row[k];
  return acc;
}

poly::MultivariatePolynomial Estimator::local_polynomial(std::size_t ordinal) const {
  const auto D = static_cast<Eigen::Index>(cfg_.dim);
  const auto center = partition_->center(ordinal);
  const double half = 0.5 * cfg_.h;
  Eigen::VectorXd c(D);
  for (Eigen::Index d = 0; d < D; ++d) c(d) = -center[static_cast<std::size_t>(d)] / half;
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(D, D) / half;
  return poly::affine_substitute(local_u_[ordinal], c, M);
}

ConditionalExpansion Estimator::expansion(const poly::MultiIndex& iota) const {
  if (!model_.has_constant_coefficients()) {
    throw ConfigError("expansion: requires a model with state-independent drift and diffusion");
  }
  if (iota.dim() != static_cast<std::size_t>(cfg_.dim)) throw ConfigError("expansion: iota dimension mismatch");
  const auto D = static_cast<Eigen::Index>(cfg_.dim);
  const auto dim = static_cast<std::size_t>(cfg_.dim);
  const double half = 0.5 * cfg_.h;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(D);
  const Eigen::VectorXd b = model_.drift(zero);
  const Eigen::MatrixXd sigma = model_.diffusion(zero);

  // In local coordinates u = (x - a)/(h/2) the argument of the cube polynomial
  // is u + b Delta/(h/2) + sigma sqrt(Delta)/(h/2) w, the same on every cube.
  const Eigen::VectorXd shift = b * (cfg_.delta / half);
  Eigen::MatrixXd M(D, 2 * D);
  M.leftCols(D) = Eigen::MatrixXd::Identity(D, D);
  M.rightCols(D) = sigma * (std::sqrt(cfg_.delta) / half);
  const auto weight = embed(poly::scaled_hermite_weight_poly(iota, cfg_.delta), 2 * dim, dim);
  const int weight_deg = iota.abs();
  const auto moments = num::truncated_moments(cfg_.max_degree + weight_deg + 1, cfg_.r2);

  ConditionalExpansion out;
  out.partition_ = partition_;
  out.polys_.reserve(fits_.size());
  out.compiled_.reserve(fits_.size());
  for (std::size_t ord = 0; ord < fits_.size(); ++ord) {
    poly::MultivariatePolynomial local(dim);
    if (!fits_[ord].truncated) {
      const auto joint = poly::poly_mul(poly::affine_substitute(local_u_[ord], shift, M), weight);
      local = poly::expect_truncated_gaussian_partial(joint, dim, moments);
    }
    out.compiled_.emplace_back(local);
    out.polys_.push_back(std::move(local));
  }
  return out;
}

double ConditionalExpansion::operator()(std::span<const double> x) const {
  const auto ord = partition_->locate(x);
  if (!ord) return 0.0;
  const auto idx = partition_->index(*ord);
  const double h = partition_->edge();
  double u_buf[8];
  std::vector<double> u_heap;
  double* u = u_buf;
  if (x.size() > 8) {
    u_heap.resize(x.size());
    u = u_heap.data();
  }
  for (std::size_t d = 0; d < x.size(); ++d) u[d] = (x[d] - h * (idx[d] + 0.5)) / (0.5 * h);
  return compiled_[*ord](std::span<const double>(u, x.size()));
}

// --- L2 error --------------------------------------------------------------

namespace {

double radical_inverse(std::uint64_t n, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

template <class Zhat>
double l2_error_impl(const CubicPartition& part, const Zhat& zhat, const Target& reference,
                     const GaussianMeasure& measure) {
  const auto dim = static_cast<std::size_t>(part.dim());
  if (measure.mean.size() != dim) throw ConfigError("l2_error: measure dimension mismatch");
  if (!(measure.variance > 0.0)) throw ConfigError("l2_error: measure variance must be positive");
  const double sd = std::sqrt(measure.variance);

  if (dim == 1) {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double m = measure.mean[0];
    auto density = [&](double x) { return num::std_normal_pdf((x - m) / sd) / sd; };
    auto sq_err = [&](double x) {
      const double diff = reference(std::span<const double>(&x, 1)) - zhat(std::span<const double>(&x, 1));
      return diff * diff * density(x);
    };
    auto ref_only = [&](double x) {
      const double r = reference(std::span<const double>(&x, 1));
      return r * r * density(x);
    };
    // The integrand is smooth on each cube, so a shallow adaptive rule is
    // already at rounding level; deep recursion only chases noise when the
    // error itself is tiny.
    constexpr unsigned kDepth = 4;
    constexpr double kTol = 1e-10;
    constexpr double kTail = 40.0;  // standard deviations; phi underflows beyond
    double total = 0.0;
    double lo = m;
    double hi = m;
    if (part.size() > 0) {
      lo = part.edge() * part.index(0)[0];
      hi = part.edge() * (part.index(part.size() - 1)[0] + 1);
      for (std::size_t ord = 0; ord < part.size(); ++ord) {
        const double a = part.edge() * part.index(ord)[0];
        const double b = part.edge() * (part.index(ord)[0] + 1);
        total += Quad::integrate(sq_err, a, b, kDepth, kTol);
      }
    }
    if (lo > m - kTail * sd) total += Quad::integrate(ref_only, m - kTail * sd, lo, kDepth, kTol);
    if (hi < m + kTail * sd) total += Quad::integrate(ref_only, hi, m + kTail * sd, kDepth, kTol);
    if (!std::isfinite(total)) throw NumericalError("l2_error: quadrature produced a non-finite value");
    return std::sqrt(std::max(total, 0.0));
  }

  // Halton points mapped through the normal quantile.
  static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > std::size(kPrimes)) throw ConfigError("l2_error: dimension too large for the Halton rule");
  constexpr std::uint64_t kPoints = 1u << 17;
  std::vector<double> x(dim);
  double acc = 0.0;
  for (std::uint64_t n = 1; n <= kPoints; ++n) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = measure.mean[d] + sd * num::std_normal_quantile(radical_inverse(n, kPrimes[d]));
    }
    const double diff = reference(x) - zhat(x);
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(kPoints));
}

}  // namespace

double l2_error(const Estimator& est, const poly::MultiIndex& iota, const Target& reference,
                const GaussianMeasure& measure) {
  if (est.model().has_constant_coefficients()) {
    return l2_error(est.expansion(iota), reference, measure);
  }
  auto zhat = [&](std::span<const double> x) { return est.evaluate(iota, x); };
  return l2_error_impl(est.partition(), zhat, reference, measure);
}

double l2_error(const ConditionalExpansion& zhat, const Target& reference, const GaussianMeasure& measure) {
  return l2_error_impl(zhat.partition(), zhat, reference, measure);
}

}  // namespace rawbfst
