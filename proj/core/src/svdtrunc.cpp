#include "rawbfst/svdtrunc.hpp"

#include <string>

#include "rawbfst/error.hpp"

namespace rawbfst {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("fit_truncated: non-finite entries in ") + what);
}

using Svd = Eigen::BDCSVD<Eigen::MatrixXd>;

double min_sq(const Svd& svd, Eigen::Index rows, Eigen::Index cols) {
  if (rows < cols) return 0.0;
  const double s = svd.singularValues()(cols - 1);
  return s * s;
}

}  // namespace

double smallest_singular_sq(const Eigen::Ref<const Eigen::MatrixXd>& design) {
  if (design.cols() == 0) throw ConfigError("smallest_singular_sq: design has no columns");
  require_finite(design, "design");
  Svd svd(design);
  return min_sq(svd, design.rows(), design.cols());
}

CubeRegression fit_truncated(const Eigen::Ref<const Eigen::MatrixXd>& design,
                             const Eigen::Ref<const Eigen::VectorXd>& targets, double tau) {
  const Eigen::Index L = design.rows();
  const Eigen::Index K = design.cols();
  if (L < 1 || K < 1) throw ConfigError("fit_truncated: design must be non-empty");
  if (targets.size() != L) throw ConfigError("fit_truncated: target length does not match design rows");
  if (!(tau > 0.0)) throw ConfigError("fit_truncated: threshold tau must be positive");
  require_finite(design, "design");
  require_finite(targets, "targets");

  // A = U_A S V_A^T is the transpose of the A^T = U D V factorization; the
  // thin factors are all that the minimum-norm solution needs.
  Svd svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CubeRegression out;
  out.s_min_sq = min_sq(svd, L, K);
  out.coeffs = Eigen::VectorXd::Zero(K);
  if (out.s_min_sq < tau * static_cast<double>(L)) {
    out.truncated = true;
    return out;
  }
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXd proj = svd.matrixU().transpose() * targets;
  for (Eigen::Index k = 0; k < K; ++k) proj(k) /= s(k);
  out.coeffs = svd.matrixV() * proj;
  out.truncated = false;
  return out;
}

}  // namespace rawbfst
