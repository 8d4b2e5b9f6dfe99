#include "rawbfst/numkernel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "rawbfst/error.hpp"

namespace rawbfst::num {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// Acklam's rational approximation of the lower-tail normal quantile,
// relative error about 1.15e-9 before refinement.
double acklam_lower(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// p in (0, 1/2]; result <= 0.
double lower_tail_quantile(double p) {
  double x = acklam_lower(p);
  // One Halley step on Phi(x) - p; Phi is evaluated in the lower tail where
  // erfc keeps full relative accuracy.
  const double e = std_normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  if (p <= 0.5) return lower_tail_quantile(p);
  return -lower_tail_quantile(1.0 - p);  // 1-p is exact for p in [1/2, 1)
}

double std_normal_quantile_upper(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ConfigError("std_normal_quantile_upper: q must lie in (0,1), got " + std::to_string(q));
  }
  if (q <= 0.5) return -lower_tail_quantile(q);
  return lower_tail_quantile(1.0 - q);
}

double chi2_quantile(int dof, double alpha) {
  if (dof < 1) throw ConfigError("chi2_quantile: degrees of freedom must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("chi2_quantile: alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  if (dof == 1) {
    const double z = std_normal_quantile_upper(0.5 * alpha);
    return z * z;
  }
  if (dof == 2) return -2.0 * std::log(alpha);
  return 2.0 * boost::math::gamma_q_inv(0.5 * dof, alpha);
}

TruncatedMomentTable truncated_moments(int q_max, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ConfigError("truncated_moments: truncation level must be positive and finite");
  }
  if (q_max < 0) throw ConfigError("truncated_moments: q_max must be >= 0");

  using ld = long double;
  const ld rl = r;
  const ld tail = 0.5L * std::erfc(rl / std::sqrt(2.0L));
  const ld dens = std::exp(-0.5L * rl * rl) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);

  std::vector<double> m(static_cast<std::size_t>(q_max) + 1, 0.0);
  m[0] = 1.0;
  ld prev = 1.0L;
  ld r_pow = 1.0L;  // r^{2q-2}
  for (int q = 1; 2 * q <= q_max; ++q) {
    const ld cur = static_cast<ld>(2 * q - 1) * prev +
                   2.0L * r_pow * (rl * rl - static_cast<ld>(2 * q - 1)) * tail -
                   2.0L * r_pow * rl * dens;
    m[static_cast<std::size_t>(2 * q)] = static_cast<double>(cur);
    prev = cur;
    r_pow *= rl * rl;
  }
  return TruncatedMomentTable(r, std::move(m));
}

std::vector<double> hermite_coeffs(int q) {
  if (q < 0) throw ConfigError("hermite_coeffs: degree must be >= 0");
  std::vector<double> prev{1.0};
  if (q == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int n = 1; n < q; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n) + 2, 0.0);
    for (std::size_t k = 0; k < cur.size(); ++k) next[k + 1] += cur[k];
    for (std::size_t k = 0; k < prev.size(); ++k) next[k] -= n * prev[k];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double hermite_value(int q, double x) {
  if (q == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int n = 1; n < q; ++n) {
    const double next = x * cur - n * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace rawbfst::num
