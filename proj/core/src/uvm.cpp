#include "rawbfst/uvm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "rawbfst/error.hpp"
#include "rawbfst/numkernel.hpp"

namespace rawbfst::uvm {

void UvmConfig::validate() const {
  if (!(sigma_l > 0.0 && sigma_l <= sigma_r && sigma_r <= sigma_h)) {
    throw ConfigError("UVM volatilities must satisfy 0 < sigma_l <= sigma_r <= sigma_h");
  }
  if (!(strike_low < strike_high)) throw ConfigError("UVM strikes must satisfy K1 < K2");
  if (steps < 1) throw ConfigError("UVM needs at least one time step");
  if (!(maturity > 0.0) || !(s0 > 0.0)) throw ConfigError("UVM maturity and spot must be positive");
  if (!(sigma0_sq > 0.0)) throw ConfigError("UVM sigma0^2 must be positive");
}

std::size_t UvmRegression::paths(double delta) const {
  return static_cast<std::size_t>(std::ceil(path_multiplier * c1_paths * std::log(1.0 / delta)));
}

double call_spread_payoff(double x, const UvmConfig& cfg) {
  const double s =
      cfg.s0 * std::exp((cfg.mu - 0.5 * cfg.sigma_r * cfg.sigma_r) * cfg.maturity + cfg.sigma_r * x);
  return std::max(0.0, s - cfg.strike_low) - std::max(0.0, s - cfg.strike_high);
}

double g_combine(double z0, double z1, double z2, double delta, const UvmConfig& cfg) {
  const double gap = z2 - cfg.sigma_r * z1;
  const double vr2 = cfg.sigma_r * cfg.sigma_r;
  const double ratio = gap > 0.0 ? cfg.sigma_h * cfg.sigma_h / vr2 : cfg.sigma_l * cfg.sigma_l / vr2;
  return z0 + 0.5 * delta * gap * (ratio - 1.0);
}

namespace {

// y_hat_{i-1} built from the step-i estimator; shares ownership of the expansions.
struct StepFunction {
  std::shared_ptr<const std::array<ConditionalExpansion, 3>> z;
  double delta;
  UvmConfig cfg;
  Recursion mode;

  double operator()(std::span<const double> x) const {
    const double z0 = (*z)[0](x);
    if (mode == Recursion::kLinear) return z0;
    return g_combine(z0, (*z)[1](x), (*z)[2](x), delta, cfg);
  }
};

}  // namespace

UvmResult price(const UvmConfig& cfg, const UvmRegression& reg, std::uint64_t seed, Recursion mode) {
  cfg.validate();
  const double delta = cfg.delta();
  const EulerModel base = EulerModel::brownian(1);

  Target current = [cfg](std::span<const double> x) { return call_spread_payoff(x[0], cfg); };
  UvmResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.steps));

  for (int i = cfg.steps; i >= 1; --i) {
    ExplicitRecipe recipe;
    recipe.delta = delta;
    recipe.dim = 1;
    recipe.max_degree = reg.max_degree;
    recipe.gamma_cube = reg.gamma_cube;
    recipe.gamma1_trunc = reg.gamma1_trunc;
    recipe.gamma2_trunc = reg.gamma2_trunc;
    recipe.c_cube = reg.c_cube;
    recipe.c1_trunc = reg.c1_trunc;
    recipe.c2_trunc = reg.c2_trunc;
    recipe.tau = reg.tau;
    recipe.paths = reg.paths(delta);
    recipe.c2f = cfg.sigma0_sq + (i - 1) * delta;

    StepTrace st;
    st.step = i;
    st.c2f = recipe.c2f;

    Estimator est = [&] {
      try {
        return fit(base.with_c2f(recipe.c2f), current, make_config(recipe), seed, static_cast<std::uint64_t>(i));
      } catch (const ConfigError& e) {
        throw ConfigError("UVM step " + std::to_string(i) + ": " + e.what());
      } catch (const std::exception& e) {
        throw NumericalError("UVM step " + std::to_string(i) + ": " + e.what());
      }
    }();

    st.cubes = est.partition().size();
    st.truncated = est.truncated_cubes();
    st.paths = est.config().paths;
    st.target_min = std::numeric_limits<double>::infinity();
    st.target_max = -std::numeric_limits<double>::infinity();
    for (std::size_t ord = 0; ord < est.partition().size(); ++ord) {
      const auto a = est.partition().center(ord);
      const double v = current(a);
      st.target_min = std::min(st.target_min, v);
      st.target_max = std::max(st.target_max, v);
    }

    auto z = std::make_shared<std::array<ConditionalExpansion, 3>>();
    for (int k = 0; k < 3; ++k) (*z)[static_cast<std::size_t>(k)] = est.expansion(poly::MultiIndex{k});
    current = StepFunction{std::move(z), delta, cfg, mode};
    const double origin = 0.0;
    st.value_at_zero = current(std::span<const double>(&origin, 1));
    result.trace.push_back(st);
  }

  const double origin = 0.0;
  result.price = current(std::span<const double>(&origin, 1));
  return result;
}

double black_scholes_call_spread(const UvmConfig& cfg, double sigma) {
  const double T = cfg.maturity;
  const double vol = sigma * std::sqrt(T);
  auto call = [&](double k) {
    const double d1 = (std::log(cfg.s0 / k) + (cfg.mu + 0.5 * sigma * sigma) * T) / vol;
    const double d2 = d1 - vol;
    return cfg.s0 * std::exp(cfg.mu * T) * num::std_normal_cdf(d1) - k * num::std_normal_cdf(d2);
  };
  return call(cfg.strike_low) - call(cfg.strike_high);
}

}  // namespace rawbfst::uvm
