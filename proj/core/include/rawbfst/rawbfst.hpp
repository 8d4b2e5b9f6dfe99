#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rawbfst/partition.hpp"
#include "rawbfst/polynomial.hpp"
#include "rawbfst/random.hpp"
#include "rawbfst/svdtrunc.hpp"

namespace rawbfst {

/// One-step Euler dynamics X2 = X1 + b(X1) Delta + sigma(X1) sqrt(Delta) xi
/// together with the constants of the Gaussian upper bound on the density
/// of X1: f(x) <= C1f (2 pi C2f)^{-D/2} exp(-|x|^2 / (2 C2f)).
class EulerModel {
 public:
  using Drift = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Diffusion = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  static EulerModel constant(Eigen::VectorXd drift, Eigen::MatrixXd diffusion, double c1f = 1.0, double c2f = 1.0);
  /// b = 0, sigma = identity.
  static EulerModel brownian(int dim, double c1f = 1.0, double c2f = 1.0);
  static EulerModel general(int dim, Drift drift, Diffusion diffusion, double c1f = 1.0, double c2f = 1.0);

  int dim() const { return dim_; }
  double c1f() const { return c1f_; }
  double c2f() const { return c2f_; }
  EulerModel with_c2f(double c2f) const;

  /// True when b and sigma do not depend on the state; enables the cached
  /// piecewise-polynomial form of the conditional expectation.
  bool has_constant_coefficients() const { return const_drift_.has_value(); }

  Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd diffusion(const Eigen::VectorXd& x) const;

 private:
  EulerModel() = default;

  int dim_ = 0;
  double c1f_ = 1.0;
  double c2f_ = 1.0;
  std::optional<Eigen::VectorXd> const_drift_;
  std::optional<Eigen::MatrixXd> const_diffusion_;
  Drift drift_fn_;
  Diffusion diffusion_fn_;
};

/// c*_paths(Q, D) = 2/3 + 8/3 sum_{|j|_1 <= Q} prod_d (2 j_d + 1).
double c_star_paths(int max_degree, int dim);

/// All constants of the algorithm after resolution.
struct RawbfstConfig {
  int dim = 1;
  double delta = 0.0;
  int rho = 0;  ///< 0 when the exponents were given explicitly
  poly::MultiIndex iota;
  int max_degree = 0;  ///< Q
  double tau = 0.0;
  double c_cube = 0.0;
  double c1_trunc = 0.0;
  double c2_trunc = 0.0;
  double c1_paths = 0.0;
  double c2_paths = 1.0;
  double gamma_cube = 0.0;
  double gamma1_trunc = 0.0;
  double gamma2_trunc = 0.0;
  double c2f = 1.0;
  // derived
  double h = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  std::size_t paths = 0;       ///< L
  std::size_t basis_size = 0;  ///< K = binomial(D+Q, D)
};

/// Inputs of the convergence-rate recipe: exponents follow from rho and |iota|.
struct RateRecipe {
  double delta = 0.0;
  int rho = 2;
  poly::MultiIndex iota{0};
  int max_degree = 0;
  double c_cube = 5.0;
  double c1_trunc = 5.0;
  double c2_trunc = 5.0;
  double c1_paths = 0.0;
  double c2_paths = 1.0;
  double tau = 0.0;
  double c2f = 1.0;
};

/// Inputs with the exponents and path count set directly.
struct ExplicitRecipe {
  double delta = 0.0;
  int dim = 1;
  int max_degree = 0;
  double gamma_cube = 0.0;
  double gamma1_trunc = 0.0;
  double gamma2_trunc = 0.0;
  double c_cube = 0.0;
  double c1_trunc = 0.0;
  double c2_trunc = 0.0;
  double tau = 0.0;
  std::size_t paths = 0;
  double c2f = 1.0;
};

/// gamma_cube = (rho + |iota|) / (2 (Q + 1)), gamma1 = rho, gamma2 = 1.5 (|iota| + rho),
/// L = ceil(rho c1_paths log(c2_paths / Delta)). Throws ConfigError naming the
/// violated condition (Q >= |iota| + rho, c1_paths > c*_paths, tau range, Delta < 1/e).
RawbfstConfig derive_config(const RateRecipe& recipe);
RawbfstConfig make_config(const ExplicitRecipe& recipe);

/// h = c_cube Delta^gamma_cube; r1 = sqrt(C2f chi2_D(c1_trunc Delta^gamma1));
/// r2 = sqrt(2 log(c2_trunc Delta^-gamma2 log(1/Delta))).
void resolve_geometry(RawbfstConfig& cfg);

/// Upper bound on the admissible threshold, 1 - sqrt(c*_paths / c1_paths).
double tau_upper_bound(int max_degree, int dim, double c1_paths);

using Target = std::function<double(std::span<const double>)>;

/// Samples (U, X) of one cube, rows are samples.
struct CubeSamples {
  Eigen::MatrixXd start;  ///< U, L x D
  Eigen::MatrixXd end;    ///< X, L x D
};

CubeSamples simulate_cube_samples(const EulerModel& model, const CubicPartition& partition, std::size_t ordinal,
                                  const RawbfstConfig& cfg, PhiloxStream& rng);

/// Piecewise polynomial x -> z_hat(x) on the cube partition. Only produced for
/// models with state-independent coefficients, where the weighted expectations are
/// polynomials in x on each cube.
class ConditionalExpansion {
 public:
  double operator()(std::span<const double> x) const;
  const CubicPartition& partition() const { return *partition_; }
  const poly::MultivariatePolynomial& cube_polynomial(std::size_t ordinal) const { return polys_[ordinal]; }

 private:
  friend class Estimator;
  std::shared_ptr<const CubicPartition> partition_;
  std::vector<poly::MultivariatePolynomial> polys_;
  std::vector<poly::CompiledPolynomial> compiled_;
};

/// Result of the regression steps: per-cube coefficients of the local
/// Legendre bases. Immutable; evaluate() is thread-safe.
class Estimator {
 public:
  const RawbfstConfig& config() const { return cfg_; }
  const CubicPartition& partition() const { return *partition_; }
  const EulerModel& model() const { return model_; }
  const std::vector<poly::MultiIndex>& basis() const { return basis_; }
  const CubeRegression& regression(std::size_t ordinal) const { return fits_[ordinal]; }
  std::size_t truncated_cubes() const;

  /// Closed-form E[H_{iota,Delta}([xi]_r2) y_hat(x, X2)] with X2 the one-step
  /// Euler transition from x with clamped innovation; 0 outside the partition.
  double evaluate(const poly::MultiIndex& iota, std::span<const double> x) const;

  /// The fitted regression function y_hat(x1, x2): local polynomial of the cube containing x1, at x2.
  double regression_value(std::span<const double> x1, std::span<const double> x2) const;

  /// Local polynomial of cube `ordinal` in the original coordinates x2.
  poly::MultivariatePolynomial local_polynomial(std::size_t ordinal) const;

  /// Cached form of evaluate(iota, .). Requires constant coefficients.
  ConditionalExpansion expansion(const poly::MultiIndex& iota) const;

 private:
  friend Estimator fit(const EulerModel&, const Target&, const RawbfstConfig&, std::uint64_t, std::uint64_t);

  RawbfstConfig cfg_;
  EulerModel model_ = EulerModel::brownian(1);
  std::shared_ptr<const CubicPartition> partition_;
  std::vector<poly::MultiIndex> basis_;
  std::vector<CubeRegression> fits_;
  std::vector<poly::MultivariatePolynomial> local_u_;  ///< sum_k alpha_k p_{j_k}(u), u = (x - a) / (h/2)
};

/// Partition, local Legendre bases, per-cube sampling and
/// truncated regression. Cube streams are keyed by (seed, stream_tag, cube
/// index), so results do not depend on the parallel schedule.
Estimator fit(const EulerModel& model, const Target& y, const RawbfstConfig& cfg, std::uint64_t seed,
              std::uint64_t stream_tag = 0);

/// Isotropic Gaussian weight N(mean, variance I) for L2 errors.
struct GaussianMeasure {
  std::vector<double> mean{0.0};
  double variance = 1.0;
};

/// sqrt of int |reference(x) - z_hat(x)|^2 mu(dx). Adaptive Gauss-Kronrod per
/// cube in one dimension, scrambled-free Halton quasi Monte Carlo otherwise.
double l2_error(const Estimator& est, const poly::MultiIndex& iota, const Target& reference,
                const GaussianMeasure& measure);

/// Same, for an already expanded z_hat.
double l2_error(const ConditionalExpansion& zhat, const Target& reference, const GaussianMeasure& measure);

}  // namespace rawbfst
