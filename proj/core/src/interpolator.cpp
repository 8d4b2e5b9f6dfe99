#include "rawbfst/interpolator.hpp"

#include <algorithm>
#include <cmath>

#include "rawbfst/error.hpp"

namespace rawbfst {

namespace {

// Legendre values L_0..L_q at t by Bonnet's recursion.
void legendre_values(double t, int q, double* out) {
  out[0] = 1.0;
  if (q >= 1) out[1] = t;
  for (int n = 1; n < q; ++n) out[n + 1] = ((2.0 * n + 1.0) * t * out[n] - n * out[n - 1]) / (n + 1.0);
}

}  // namespace

void tensor_legendre_row(std::span<const poly::MultiIndex> basis, std::span<const double> t, int max_degree,
                         std::span<double> out) {
  const auto dim = t.size();
  const auto stride = static_cast<std::size_t>(max_degree) + 1;
  double table[64];
  std::vector<double> heap;
  double* vals = table;
  if (dim * stride > 64) {
    heap.resize(dim * stride);
    vals = heap.data();
  }
  for (std::size_t d = 0; d < dim; ++d) {
    legendre_values(t[d], max_degree, vals + d * stride);
    for (std::size_t q = 0; q < stride; ++q) vals[d * stride + q] *= std::sqrt(2.0 * static_cast<double>(q) + 1.0);
  }
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double v = 1.0;
    for (std::size_t d = 0; d < dim; ++d) v *= vals[d * stride + static_cast<std::size_t>(basis[k][d])];
    out[k] = v;
  }
}

std::size_t required_samples(const InterpolatorConfig& cfg, int dim, double gamma, double c0) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("required_samples: epsilon must lie in (0,1)");
  if (!(cfg.f_lower > 0.0) || cfg.f_upper < cfg.f_lower) throw ConfigError("required_samples: need 0 < f_* <= f^*");
  if (!(c0 > 0.0)) throw ConfigError("required_samples: c0 must be positive");
  const double n_d = std::pow(static_cast<double>(cfg.cells_per_dim), dim);
  const double k = poly::binomial(dim + cfg.max_degree, dim);
  const double eps = cfg.epsilon;
  const double lead = (n_d * k * std::exp(2.0 * cfg.max_degree) * (36.0 * cfg.f_upper / cfg.f_lower + 4.0 * eps) +
                       6.0 * eps * cfg.f_upper) /
                      (3.0 * eps * eps * cfg.f_lower);
  const double logf =
      std::log(c0 * std::pow(static_cast<double>(cfg.cells_per_dim), dim + 2.0 * (cfg.max_degree + gamma)));
  return static_cast<std::size_t>(std::ceil(lead * std::max(logf, 1.0)));
}

std::size_t UnitCubeInterpolant::truncated_cells() const {
  return static_cast<std::size_t>(
      std::count_if(fits_.begin(), fits_.end(), [](const CubeRegression& f) { return f.truncated; }));
}

std::size_t UnitCubeInterpolant::cell_of(std::span<const double> x) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    int i = static_cast<int>(std::ceil(x[d] * n_)) - 1;
    i = std::clamp(i, 0, n_ - 1);
    flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  return flat;
}

double UnitCubeInterpolant::operator()(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_)) throw ConfigError("UnitCubeInterpolant: dimension mismatch");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) return 0.0;
  }
  const std::size_t flat = cell_of(x);
  const auto& fit = fits_[flat];
  if (fit.truncated) return 0.0;

  std::vector<double> t(x.size());
  std::size_t rem = flat;
  for (std::size_t d = x.size(); d-- > 0;) {
    const auto i = static_cast<double>(rem % static_cast<std::size_t>(n_));
    rem /= static_cast<std::size_t>(n_);
    t[d] = 2.0 * (n_ * x[d] - i) - 1.0;
  }
  std::vector<double> row(basis_.size());
  const int q = basis_.back().abs();
  tensor_legendre_row(basis_, t, q, row);
  const double scale = std::pow(static_cast<double>(n_), 0.5 * dim_);
  double acc = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) acc += fit.coeffs(static_cast<Eigen::Index>(k)) * row[k];
  return scale * acc;
}

UnitCubeInterpolant interpolate_unit_cube(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                          const Eigen::Ref<const Eigen::VectorXd>& values,
                                          const InterpolatorConfig& cfg) {
  if (points.rows() == 0) throw ConfigError("interpolate_unit_cube: no samples");
  if (points.rows() != values.size()) throw ConfigError("interpolate_unit_cube: points and values differ in length");
  if (cfg.cells_per_dim < 1) throw ConfigError("interpolate_unit_cube: N must be >= 1");
  if (cfg.max_degree < 0) throw ConfigError("interpolate_unit_cube: Q must be >= 0");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("interpolate_unit_cube: epsilon must lie in (0,1)");
  if (!(cfg.f_lower > 0.0)) throw ConfigError("interpolate_unit_cube: f_* must be positive");
  if (!values.allFinite()) throw NumericalError("interpolate_unit_cube: non-finite target values");

  UnitCubeInterpolant out;
  out.dim_ = static_cast<int>(points.cols());
  out.n_ = cfg.cells_per_dim;
  if (out.dim_ < 1) throw ConfigError("interpolate_unit_cube: samples have no coordinates");
  out.basis_ = poly::enumerate_multi_indices(out.dim_, cfg.max_degree);

  std::size_t cells = 1;
  for (int d = 0; d < out.dim_; ++d) cells *= static_cast<std::size_t>(out.n_);

  std::vector<std::vector<Eigen::Index>> members(cells);
  std::vector<double> x(static_cast<std::size_t>(out.dim_));
  for (Eigen::Index l = 0; l < points.rows(); ++l) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      x[d] = points(l, static_cast<Eigen::Index>(d));
      if (!(x[d] >= 0.0 && x[d] <= 1.0)) throw ConfigError("interpolate_unit_cube: sample outside the unit cube");
    }
    members[out.cell_of(x)].push_back(l);
  }

  const auto K = static_cast<Eigen::Index>(out.basis_.size());
  const double scale = std::pow(static_cast<double>(out.n_), 0.5 * out.dim_);
  const double total = static_cast<double>(points.rows());
  out.fits_.resize(cells);
  std::vector<double> t(static_cast<std::size_t>(out.dim_));
  std::vector<double> row(out.basis_.size());
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& idx = members[c];
    if (idx.empty()) {
      out.fits_[c] = CubeRegression{Eigen::VectorXd::Zero(K), 0.0, true};
      continue;
    }
    std::vector<int> cell_index(static_cast<std::size_t>(out.dim_));
    std::size_t rem = c;
    for (std::size_t d = cell_index.size(); d-- > 0;) {
      cell_index[d] = static_cast<int>(rem % static_cast<std::size_t>(out.n_));
      rem /= static_cast<std::size_t>(out.n_);
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), K);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t d = 0; d < t.size(); ++d) {
        t[d] = 2.0 * (out.n_ * points(idx[r], static_cast<Eigen::Index>(d)) - cell_index[d]) - 1.0;
      }
      tensor_legendre_row(out.basis_, t, cfg.max_degree, row);
      for (Eigen::Index k = 0; k < K; ++k) A(static_cast<Eigen::Index>(r), k) = scale * row[static_cast<std::size_t>(k)];
      Y(static_cast<Eigen::Index>(r)) = values(idx[r]);
    }
    // s^2 >= tau * L_total  <=>  s^2 >= (tau L_total / L_cell) * L_cell.
    const double tau_cell = cfg.threshold() * total / static_cast<double>(idx.size());
    out.fits_[c] = fit_truncated(A, Y, tau_cell);
  }
  return out;
}

}  // namespace rawbfst
