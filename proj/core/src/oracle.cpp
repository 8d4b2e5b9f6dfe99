#include "rawbfst/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rawbfst/error.hpp"
#include "rawbfst/numkernel.hpp"
#include "rawbfst/random.hpp"

namespace rawbfst::oracle {

OracleEstimate mc_weighted_conditional(const Target& y, const EulerModel& model, const poly::MultiIndex& iota,
                                       double delta, std::optional<double> clamp, std::span<const double> x,
                                       std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("mc_weighted_conditional: need at least two draws");
  const auto D = static_cast<Eigen::Index>(model.dim());
  if (x.size() != static_cast<std::size_t>(D) || iota.dim() != x.size()) {
    throw ConfigError("mc_weighted_conditional: dimension mismatch");
  }
  const Eigen::VectorXd x1 = Eigen::Map<const Eigen::VectorXd>(x.data(), D);
  const Eigen::VectorXd b = model.drift(x1);
  const Eigen::MatrixXd sigma = model.diffusion(x1);
  const double sqrt_delta = std::sqrt(delta);
  const double scale = std::pow(delta, -0.5 * iota.abs());

  auto rng = make_stream(seed, StreamNamespace::kOracle, 0x6d63u);
  Eigen::VectorXd xi(D);
  Eigen::VectorXd x2(D);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    for (Eigen::Index d = 0; d < D; ++d) {
      double v = rng.normal();
      if (clamp) v = std::clamp(v, -*clamp, *clamp);
      xi(d) = v;
    }
    double w = scale;
    for (Eigen::Index d = 0; d < D; ++d) w *= num::hermite_value(iota[static_cast<std::size_t>(d)], xi(d));
    x2 = x1 + b * delta + sigma * (sqrt_delta * xi);
    const double v = w * y(std::span<const double>(x2.data(), static_cast<std::size_t>(D)));
    const double dlt = v - mean;
    mean += dlt / static_cast<double>(k);
    m2 += dlt * (v - mean);
  }
  OracleEstimate out;
  out.mean = mean;
  out.n = n;
  out.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

OracleEstimate mc_estimator(const Estimator& est, const poly::MultiIndex& iota, std::span<const double> x,
                            std::size_t n, std::uint64_t seed) {
  const std::vector<double> x1(x.begin(), x.end());
  auto yhat = [&est, &x1](std::span<const double> x2) { return est.regression_value(x1, x2); };
  return mc_weighted_conditional(yhat, est.model(), iota, est.config().delta, est.config().r2, x, n, seed);
}

double test_function(double x) { return x * x * std::exp(-0.5 * x * x); }

double y_second_derivative(double x) {
  const double x2 = x * x;
  return (x2 * x2 - 5.0 * x2 + 2.0) * std::exp(-0.5 * x2);
}

double closed_form_z(double x, double delta) {
  const double x2 = x * x;
  const double d = delta;
  const double num = x2 * x2 - (5.0 + 4.0 * d - d * d) * x2 + 2.0 + 3.0 * d - d * d * d;
  return num / std::pow(1.0 + d, 4.5) * std::exp(-x2 / (2.0 * (1.0 + d)));
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  constexpr unsigned kMaxDepth = 25;
  QuadResult r;
  double l1 = 0.0;
  r.value = Quad::integrate(f, a, b, kMaxDepth, rel_tol, &r.error, &l1);
  if (!std::isfinite(r.value)) throw NumericalError("integrate: non-finite result");
  // The Kronrod estimate cannot drop below the rounding floor of the integrand.
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * l1;
  if (r.error > std::max({abs_tol, rel_tol * std::abs(r.value), floor}) * 100.0) {
    throw NumericalError("integrate: no convergence, error estimate " + std::to_string(r.error));
  }
  return r;
}

namespace {

// phi(40) underflows to 0, so mass beyond |x| = 40 is invisible in double for
// integrands of polynomial growth. Finite limits keep the Kronrod error
// estimate meaningful; the infinite-interval transform inflates it badly.
constexpr double kGaussEdge = 40.0;

}  // namespace

QuadResult gaussian_expectation(const std::function<double(double)>& f, double abs_tol, double rel_tol) {
  auto g = [&f](double x) { return f(x) * num::std_normal_pdf(x); };
  const QuadResult lo = integrate(g, -kGaussEdge, 0.0, abs_tol, rel_tol);
  const QuadResult hi = integrate(g, 0.0, kGaussEdge, abs_tol, rel_tol);
  return {lo.value + hi.value, lo.error + hi.error};
}

double discretization_error(double delta) {
  auto sq = [delta](double x) {
    const double d = closed_form_z(x, delta) - y_second_derivative(x);
    return d * d;
  };
  // z - y'' cancels to about 1e-16 / Delta relative noise, so ask for 1e-10 only.
  return std::sqrt(gaussian_expectation(sq, 0.0, 1e-10).value);
}

double truncated_moment_quadrature(int q, double r) {
  if (!(r > 0.0) || r >= kGaussEdge) throw ConfigError("truncated_moment_quadrature: need 0 < r < 40");
  auto clamped = [q, r](double u) { return std::pow(std::clamp(u, -r, r), q) * num::std_normal_pdf(u); };
  return integrate(clamped, -kGaussEdge, -r, 1e-15).value + integrate(clamped, -r, r, 1e-15).value +
         integrate(clamped, r, kGaussEdge, 1e-15).value;
}

namespace {

// Golub-Welsch from the symmetric Jacobi matrix with off-diagonal beta_k.
QuadratureRule golub_welsch(int n, const std::function<double(int)>& beta, double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = beta(k);
    J(k - 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(mu0 * v * v);
  }
  return rule;
}

double tensor_expectation(const poly::MultivariatePolynomial& p, const QuadratureRule& rule) {
  const auto dim = p.dim();
  const auto m = rule.nodes.size();
  std::vector<std::size_t> pos(dim, 0);
  std::vector<double> x(dim);
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = rule.nodes[pos[d]];
      w *= rule.weights[pos[d]];
    }
    acc += w * poly::poly_eval(p, x);
    std::size_t d = 0;
    while (d < dim && ++pos[d] == m) pos[d++] = 0;
    if (d == dim) break;
  }
  return acc;
}

int points_for(const poly::MultivariatePolynomial& p) {
  int deg = 0;
  for (std::size_t d = 0; d < p.dim(); ++d) deg = std::max(deg, p.degree_in(d));
  return deg / 2 + 1;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("gauss_hermite: need at least one node");
  return golub_welsch(n, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
  return golub_welsch(n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
}

double gauss_hermite_expectation(const poly::MultivariatePolynomial& p) {
  return tensor_expectation(p, gauss_hermite(points_for(p)));
}

double uniform_cube_expectation(const poly::MultivariatePolynomial& p) {
  auto rule = gauss_legendre(points_for(p));
  for (double& w : rule.weights) w *= 0.5;
  return tensor_expectation(p, rule);
}

}  // namespace rawbfst::oracle
