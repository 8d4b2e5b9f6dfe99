#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rawbfst/rawbfst.hpp"

namespace rawbfst::uvm {

/// Call spread in the Uncertain Volatility Model, written in the Brownian
/// coordinate x: S = s0 exp((mu - sigma_r^2 / 2) T + sigma_r x).
struct UvmConfig {
  double s0 = 100.0;
  double mu = 0.0;
  double sigma_l = 0.1;
  double sigma_h = 0.2;
  double sigma_r = 0.15;
  double maturity = 1.0;
  double strike_low = 90.0;
  double strike_high = 110.0;
  double sigma0_sq = 0.1;
  int steps = 16;

  double delta() const { return maturity / steps; }
  void validate() const;
};

/// Regression constants of the backward recursion. The exponents are set
/// directly; L = ceil(path_multiplier * c1_paths * log(1/Delta)).
struct UvmRegression {
  int max_degree = 4;
  double gamma_cube = 0.4;
  double gamma1_trunc = 3.0;
  double gamma2_trunc = 6.0;
  double c_cube = 2.0;
  double c1_trunc = 5.0;
  double c2_trunc = 5.0;
  double c1_paths = 74.07;
  double path_multiplier = 3.0;
  double tau = 0.0233;

  std::size_t paths(double delta) const;
};

double call_spread_payoff(double x, const UvmConfig& cfg);

/// G(z0, z1, z2) = z0 + Delta/2 (z2 - sigma_r z1)
///                      (sigma_h^2/sigma_r^2 1{z2 > sigma_r z1} + sigma_l^2/sigma_r^2 1{z2 <= sigma_r z1} - 1).
double g_combine(double z0, double z1, double z2, double delta, const UvmConfig& cfg);

struct StepTrace {
  int step = 0;  ///< i, the regression target is y_hat_i
  double c2f = 0.0;
  std::size_t cubes = 0;
  std::size_t truncated = 0;
  std::size_t paths = 0;
  double target_min = 0.0;  ///< extrema of y_hat_i over the cube centers
  double target_max = 0.0;
  double value_at_zero = 0.0;  ///< y_hat_{i-1}(0)
};

struct UvmResult {
  double price = 0.0;  ///< y_hat_0(0)
  std::vector<StepTrace> trace;
};

enum class Recursion {
  kNonlinear,  ///< y_{i-1} = G(z0, z1, z2)
  kLinear,     ///< y_{i-1} = z0
};

/// Backward dynamic program: one regression per step serves iota = 0, 1, 2.
/// C2f at step i is sigma0^2 + t_{i-1}.
UvmResult price(const UvmConfig& cfg, const UvmRegression& reg, std::uint64_t seed,
                Recursion mode = Recursion::kNonlinear);

/// Undiscounted Black-Scholes expectation of the call spread payoff with
/// constant volatility sigma and drift mu; the UVM limit when all volatilities coincide.
double black_scholes_call_spread(const UvmConfig& cfg, double sigma);

}  // namespace rawbfst::uvm
