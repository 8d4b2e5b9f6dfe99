#include <cmath>

#include <benchmark/benchmark.h>

#include "rawbfst/numkernel.hpp"
#include "rawbfst/oracle.hpp"
#include "rawbfst/random.hpp"
#include "rawbfst/rawbfst.hpp"
#include "rawbfst/svdtrunc.hpp"
#include "rawbfst/uvm.hpp"

using namespace rawbfst;

namespace {

RawbfstConfig rate_config(int rho, double delta_inv) {
  RateRecipe r;
  r.delta = 1.0 / delta_inv;
  r.rho = rho;
  r.iota = poly::MultiIndex{2};
  r.max_degree = rho + 3;
  r.c1_paths = 1.1 * c_star_paths(r.max_degree, 1);
  r.tau = 0.5 * tau_upper_bound(r.max_degree, 1, r.c1_paths);
  return derive_config(r);
}

const Target kTestFunction = [](std::span<const double> x) { return oracle::test_function(x[0]); };

// Partition, sampling and regression for one rate-recipe cell. Args: rho, Delta^-1.
void BM_Fit(benchmark::State& state) {
  const auto cfg = rate_config(static_cast<int>(state.range(0)), static_cast<double>(state.range(1)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit(EulerModel::brownian(1), kTestFunction, cfg, ++seed));
  state.counters["samples"] = static_cast<double>(cfg.paths);
}
BENCHMARK(BM_Fit)->Args({2, 16})->Args({2, 1024})->Args({3, 128})->Args({4, 8192})->Unit(benchmark::kMillisecond);

void BM_FitAndError(benchmark::State& state) {
  const auto cfg = rate_config(static_cast<int>(state.range(0)), static_cast<double>(state.range(1)));
  const Target z = [&](std::span<const double> x) { return oracle::closed_form_z(x[0], cfg.delta); };
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto est = fit(EulerModel::brownian(1), kTestFunction, cfg, ++seed);
    benchmark::DoNotOptimize(l2_error(est, cfg.iota, z, GaussianMeasure{}));
  }
}
BENCHMARK(BM_FitAndError)->Args({2, 16})->Args({4, 1024})->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto cfg = rate_config(3, 128);
  const auto est = fit(EulerModel::brownian(1), kTestFunction, cfg, 1);
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.evaluate(cfg.iota, {&x, 1}));
    x = x > 1.0 ? -1.0 : x + 1e-3;
  }
}
BENCHMARK(BM_Evaluate);

void BM_ExpansionCall(benchmark::State& state) {
  const auto cfg = rate_config(3, 128);
  const auto z = fit(EulerModel::brownian(1), kTestFunction, cfg, 1).expansion(cfg.iota);
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(z({&x, 1}));
    x = x > 1.0 ? -1.0 : x + 1e-3;
  }
}
BENCHMARK(BM_ExpansionCall);

// Thin SVD fit of an L x K design.
void BM_FitTruncated(benchmark::State& state) {
  const auto L = state.range(0);
  const auto K = state.range(1);
  auto rng = make_stream(1, StreamNamespace::kHarness, 0);
  Eigen::MatrixXd A(L, K);
  Eigen::VectorXd Y(L);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < L; ++i) Y(i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(fit_truncated(A, Y, 0.01));
}
BENCHMARK(BM_FitTruncated)->Args({590, 6})->Args({6794, 8})->Args({4000, 5});

void BM_UvmPrice(benchmark::State& state) {
  uvm::UvmConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  uvm::UvmRegression reg;
  reg.c1_paths = static_cast<double>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(uvm::price(cfg, reg, ++seed).price);
}
BENCHMARK(BM_UvmPrice)->Args({16, 10})->Args({16, 74})->Args({32, 74})->Unit(benchmark::kMillisecond);

void BM_TruncatedMoments(benchmark::State& state) {
  double r = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(num::truncated_moments(16, r));
    r += 1e-9;
  }
}
BENCHMARK(BM_TruncatedMoments);

void BM_PhiloxNormal(benchmark::State& state) {
  auto rng = make_stream(1, StreamNamespace::kHarness, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_PhiloxNormal);

}  // namespace

BENCHMARK_MAIN();
