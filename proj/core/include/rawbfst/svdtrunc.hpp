#pragma once

#include <Eigen/Dense>

namespace rawbfst {

/// Outcome of one least-squares fit with brute-force SVD truncation.
/// Invariant: truncated <=> s_min_sq < tau * L <=> every coefficient is 0.
struct CubeRegression {
  Eigen::VectorXd coeffs;
  double s_min_sq = 0.0;
  bool truncated = true;
};

/// Fits Y ~ A alpha. Keeps the full minimum-norm least-squares solution when
/// the smallest squared singular value of A (L x K) is at least tau * L, and
/// returns the zero vector otherwise. Uses the thin SVD, so no L x L factor is
/// formed. Throws NumericalError on non-finite input, ConfigError on bad shapes.
CubeRegression fit_truncated(const Eigen::Ref<const Eigen::MatrixXd>& design,
                             const Eigen::Ref<const Eigen::VectorXd>& targets, double tau);

/// s_K^2 for the L x K design (0 when L < K).
double smallest_singular_sq(const Eigen::Ref<const Eigen::MatrixXd>& design);

}  // namespace rawbfst
