#pragma once

#include <vector>

namespace rawbfst::num {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// Survival function 1 - Phi(x), accurate in the upper tail.
double std_normal_ccdf(double x);

/// Inverse of std_normal_cdf on (0,1). Throws ConfigError outside (0,1).
/// For p > 1/2 the complement 1-p is formed exactly and the lower tail
/// is inverted, so arguments like 1 - 5.55e-16 keep full accuracy.
double std_normal_quantile(double p);
/// Inverse of std_normal_ccdf: x with P(xi > x) = q.
double std_normal_quantile_upper(double q);

/// (1-alpha)-quantile of the chi-square law with `dof` degrees of freedom:
/// returns c with P(Xi > c) = alpha. Note that alpha is the tail mass.
double chi2_quantile(int dof, double alpha);

/// Moments m_q = E[[xi]_r^q] of the standard normal clamped to [-r, r].
class TruncatedMomentTable {
 public:
  TruncatedMomentTable() = default;
  TruncatedMomentTable(double r, std::vector<double> moments)
      : r_(r), moments_(std::move(moments)) {}

  double r() const { return r_; }
  int max_order() const { return static_cast<int>(moments_.size()) - 1; }
  /// m_q; q must be <= max_order().
  double operator[](int q) const { return moments_[static_cast<std::size_t>(q)]; }
  const std::vector<double>& values() const { return moments_; }

 private:
  double r_ = 0.0;
  std::vector<double> moments_;
};

/// Moments m_0..m_{q_max} via the even-order recursion
///   m_{2q} = (2q-1) m_{2q-2} + 2 r^{2q-2} (r^2-2q+1)(1-Phi(r)) - 2 r^{2q-1} phi(r)
/// with base case m_0 = 1 and vanishing odd moments. The recursion runs in
/// extended precision because it amplifies rounding by (2q-1)!! for small r.
TruncatedMomentTable truncated_moments(int q_max, double r);

/// Coefficients (ascending powers) of the probabilists' Hermite polynomial H_q.
std::vector<double> hermite_coeffs(int q);
/// H_q(x) via the three-term recurrence.
double hermite_value(int q, double x);

}  // namespace rawbfst::num
