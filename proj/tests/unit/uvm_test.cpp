#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rawbfst/error.hpp"
#include "rawbfst/uvm.hpp"

using namespace rawbfst::uvm;

namespace {

double stock(double x, const UvmConfig& c) {
  return c.s0 * std::exp((c.mu - 0.5 * c.sigma_r * c.sigma_r) * c.maturity + c.sigma_r * x);
}

}  // namespace

TEST(Uvm, Payoff) {
  const UvmConfig cfg;
  EXPECT_DOUBLE_EQ(call_spread_payoff(-10.0, cfg), -0.0 + std::max(stock(-10.0, cfg) - 90.0, 0.0));
  EXPECT_EQ(call_spread_payoff(-10.0, cfg), 0.0);
  EXPECT_NEAR(call_spread_payoff(10.0, cfg), 20.0, 1e-12);
  const double x = (std::log(100.0 / 100.0) + 0.5 * 0.15 * 0.15) / 0.15;  // S = 100
  EXPECT_NEAR(stock(x, cfg), 100.0, 1e-12);
  EXPECT_NEAR(call_spread_payoff(x, cfg), 10.0, 1e-10);
  for (double y = -5.0; y <= 5.0; y += 0.01) {
    const double p = call_spread_payoff(y, cfg);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 20.0);
  }
}

TEST(Uvm, Combine) {
  UvmConfig cfg;
  const double d = 1.0 / 16;
  EXPECT_NEAR(g_combine(1.0, 0.0, 1.0, d, cfg), 1.0 + d / 2 * (0.04 / 0.0225 - 1.0), 1e-14);
  EXPECT_NEAR(g_combine(1.0, 0.0, 1.0, 0.1, cfg), 1.0389, 1e-4);
  EXPECT_NEAR(g_combine(1.0, 0.0, -1.0, d, cfg), 1.0 - d / 2 * (0.01 / 0.0225 - 1.0), 1e-14);
  EXPECT_GT(g_combine(1.0, 0.0, -1.0, d, cfg), 1.0);
  // The adjustment is never negative and proportional to Delta.
  for (double z1 = -2.0; z1 <= 2.0; z1 += 0.5) {
    for (double z2 = -2.0; z2 <= 2.0; z2 += 0.5) {
      const double a = g_combine(0.0, z1, z2, d, cfg);
      EXPECT_GE(a, 0.0);
      EXPECT_NEAR(g_combine(0.0, z1, z2, 2.0 * d, cfg), 2.0 * a, 1e-14);
    }
  }
  cfg.sigma_l = cfg.sigma_h = cfg.sigma_r;
  EXPECT_EQ(g_combine(3.0, 1.0, -2.0, d, cfg), 3.0);
}

TEST(Uvm, EqualVolatilitiesGiveLinearRecursion) {
  UvmConfig cfg;
  cfg.sigma_l = cfg.sigma_h = cfg.sigma_r = 0.15;
  const UvmRegression reg;
  const auto a = price(cfg, reg, 3, Recursion::kNonlinear);
  const auto b = price(cfg, reg, 3, Recursion::kLinear);
  EXPECT_EQ(a.price, b.price);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].value_at_zero, b.trace[i].value_at_zero);
    EXPECT_EQ(a.trace[i].target_max, b.trace[i].target_max);
  }
}

TEST(Uvm, BlackScholesLimit) {
  UvmConfig cfg;
  cfg.sigma_l = cfg.sigma_h = cfg.sigma_r = 0.15;
  cfg.steps = 64;
  const double bs = black_scholes_call_spread(cfg, 0.15);
  EXPECT_NEAR(bs, 9.52148, 1e-5);
  const UvmRegression reg;
  std::vector<double> prices;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) prices.push_back(price(cfg, reg, seed).price);
  double mean = 0.0;
  for (double p : prices) mean += p;
  mean /= static_cast<double>(prices.size());
  double var = 0.0;
  for (double p : prices) var += (p - mean) * (p - mean);
  const double sd = std::sqrt(var / static_cast<double>(prices.size() - 1));
  EXPECT_LE(std::abs(mean - bs), 3.0 * sd);
}

TEST(Uvm, TraceAndBounds) {
  const UvmConfig cfg;
  const UvmRegression reg;
  const auto r = price(cfg, reg, 7);
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(cfg.steps));
  const double d = cfg.delta();
  for (const auto& s : r.trace) {
    EXPECT_GE(s.target_min, -0.5);
    EXPECT_LE(s.target_max, 20.5);
    EXPECT_EQ(s.paths, reg.paths(d));
    EXPECT_NEAR(s.c2f, cfg.sigma0_sq + (s.step - 1) * d, 1e-14);
    EXPECT_LE(s.truncated, s.cubes);
  }
  EXPECT_EQ(r.trace.front().step, cfg.steps);
  EXPECT_EQ(r.trace.back().step, 1);
  EXPECT_EQ(r.price, r.trace.back().value_at_zero);
  EXPECT_GT(r.price, 9.0);
  EXPECT_LT(r.price, 12.0);
  EXPECT_EQ(price(cfg, reg, 7).price, r.price);
  EXPECT_NE(price(cfg, reg, 8).price, r.price);
}

TEST(Uvm, PathRule) {
  const UvmRegression reg;
  EXPECT_EQ(reg.paths(1.0 / 16), static_cast<std::size_t>(std::ceil(3.0 * 74.07 * std::log(16.0))));
}

TEST(Uvm, Validation) {
  UvmConfig cfg;
  cfg.sigma_l = 0.3;
  EXPECT_THROW(cfg.validate(), rawbfst::ConfigError);
  cfg = UvmConfig{};
  cfg.strike_high = 80.0;
  EXPECT_THROW(cfg.validate(), rawbfst::ConfigError);
  cfg = UvmConfig{};
  cfg.steps = 0;
  EXPECT_THROW(price(cfg, UvmRegression{}, 1), rawbfst::ConfigError);
  cfg = UvmConfig{};
  cfg.sigma0_sq = 0.0;
  EXPECT_THROW(cfg.validate(), rawbfst::ConfigError);
}
