#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rawbfst/polynomial.hpp"
#include "rawbfst/svdtrunc.hpp"

namespace rawbfst {

/// Settings of the piecewise Legendre interpolator on [0,1]^D.
struct InterpolatorConfig {
  int cells_per_dim = 4;    ///< N
  int max_degree = 2;       ///< Q
  double f_lower = 1.0;     ///< lower bound f_* of the sampling density
  double f_upper = 1.0;     ///< upper bound f^* (only used by required_samples)
  double epsilon = 0.5;     ///< in (0, 1)

  /// tau = (1 - epsilon) f_* / 2.
  double threshold() const { return 0.5 * (1.0 - epsilon) * f_lower; }
};

/// Sample-size rule guaranteeing the optimal rate for a (Q + gamma)-smooth
/// target in dimension `dim`:
///   L >= (N^D K e^{2Q} (36 f^*/f_* + 4 eps) + 6 eps f^*) / (3 eps^2 f_*) * log(c0 N^{D + 2(Q+gamma)})
/// with K = binomial(D+Q, D). Deliberately conservative.
std::size_t required_samples(const InterpolatorConfig& cfg, int dim, double gamma, double c0);

/// Piecewise polynomial estimate: on cell C_i the basis is
///   N^{D/2} prod_d sqrt(2 j_d + 1) L_{j_d}(2 (N x_d - i_d) - 1),
/// cells are (i/N, (i+1)/N] with x_d = 0 assigned to cell 0.
class UnitCubeInterpolant {
 public:
  int dim() const { return dim_; }
  int cells_per_dim() const { return n_; }
  std::size_t cell_count() const { return fits_.size(); }
  const CubeRegression& cell(std::size_t flat) const { return fits_[flat]; }
  std::size_t truncated_cells() const;

  double operator()(std::span<const double> x) const;

  /// Flat cell index of x in [0,1]^D.
  std::size_t cell_of(std::span<const double> x) const;

 private:
  friend UnitCubeInterpolant interpolate_unit_cube(const Eigen::Ref<const Eigen::MatrixXd>&,
                                                   const Eigen::Ref<const Eigen::VectorXd>&, const InterpolatorConfig&);

  int dim_ = 0;
  int n_ = 0;
  std::vector<poly::MultiIndex> basis_;
  std::vector<CubeRegression> fits_;
};

/// Per-cell truncated least-squares fit. The threshold is applied against the total
/// sample count (s_min^2 >= tau L_total), which is the block-diagonal form of
/// one global regression on all cells. Rows of `points` are the sample
/// locations (L x D), `values` the noiseless targets. Throws ConfigError for
/// samples outside the unit cube.
UnitCubeInterpolant interpolate_unit_cube(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                          const Eigen::Ref<const Eigen::VectorXd>& values,
                                          const InterpolatorConfig& cfg);

/// Values of sqrt(2 j_d + 1) L_{j_d}(t_d) products for every basis multi-index.
void tensor_legendre_row(std::span<const poly::MultiIndex> basis, std::span<const double> t, int max_degree,
                         std::span<double> out);

}  // namespace rawbfst
