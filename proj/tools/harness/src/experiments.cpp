#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>

#include "rawbfst/error.hpp"
#include "rawbfst/harness.hpp"
#include "rawbfst/interpolator.hpp"
#include "rawbfst/oracle.hpp"
#include "rawbfst/parallel.hpp"
#include "rawbfst/random.hpp"
#include "rawbfst/rawbfst.hpp"

namespace rawbfst::harness {

namespace {

constexpr double kUvmLimit = 11.20456;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(rep) for rep = 0..reps-1 across worker threads; the first failure
// in replicate order is rethrown.
template <class Body>
void for_each_replicate(int reps, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (int rep = 0; rep < reps; ++rep) {
    try {
      body(rep);
    } catch (...) {
      errors[static_cast<std::size_t>(rep)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double mean_of(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

double rms_of(std::span<const double> v) {
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [](double e) { return e * e; });
  return std::sqrt(mean_of(sq));
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [m](double e) { return (e - m) * (e - m); });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

void check_reps(int reps) {
  if (reps < 1) throw ConfigError("--reps must be >= 1");
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t cell_tag, int rep) {
  return combine_keys(combine_keys(master, cell_tag), static_cast<std::uint64_t>(rep));
}

double fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ConfigError("fit_slope: need at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : points) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope: abscissae must not all coincide");
  return sxy / sxx;
}

// --- second derivative ------------------------------------------------------

ExperimentReport run_second_derivative(const SecondDerivativeOptions& options) {
  check_reps(options.reps);
  std::vector<double> grid = options.grid;
  if (grid.empty()) {
    for (int n = 3; n <= 14; ++n) grid.push_back(std::ldexp(1.0, n));
  }
  if (options.rhos.empty()) throw ConfigError("--rho needs at least one value");

  ExperimentReport report;
  report.experiment = "second_derivative";
  report.version = version();
  report.seed = options.seed;
  report.parameters = {{"rho", options.rhos},
                       {"grid", grid},
                       {"reps", options.reps},
                       {"iota", 2},
                       {"max_degree", "rho + 3"},
                       {"c_cube", 5.0},
                       {"c1_trunc", 5.0},
                       {"c2_trunc", 5.0},
                       {"c2_paths", 1.0},
                       {"c2f", 1.0},
                       {"c1_paths", options.c1_paths ? nlohmann::json(*options.c1_paths) : nlohmann::json("1.1 c*")},
                       {"tau", "(1 - sqrt(c* / c1_paths)) / 2"},
                       {"target", "x^2 exp(-x^2/2)"},
                       {"reference", "closed-form z"},
                       {"measure", "N(0,1)"}};
  report.replicates.columns = {"delta_inv", "rho", "rep", "error", "cubes", "samples_per_cube", "truncated_cubes",
                               "wall_time_s"};
  report.summary.columns = {"delta_inv", "rho", "error", "discretization_error", "cubes", "paths", "truncation_rate",
                            "wall_time_s"};

  const auto model = EulerModel::brownian(1);
  const Target y = [](std::span<const double> x) { return oracle::test_function(x[0]); };
  PlotSeries disc{"second_derivative_discretization", "log10(delta_inv)", "log10(discretization_error)", {}};
  for (double delta_inv : grid) {
    disc.points.emplace_back(std::log10(delta_inv), std::log10(oracle::discretization_error(1.0 / delta_inv)));
  }

  nlohmann::json rates = nlohmann::json::object();
  for (int rho : options.rhos) {
    PlotSeries series{"second_derivative_rho" + std::to_string(rho), "log10(delta_inv)", "log10(error)", {}};
    for (double delta_inv : grid) {
      RateRecipe recipe;
      recipe.delta = 1.0 / delta_inv;
      recipe.rho = rho;
      recipe.iota = poly::MultiIndex{2};
      recipe.max_degree = rho + 3;
      const double c_star = c_star_paths(recipe.max_degree, 1);
      recipe.c1_paths = options.c1_paths.value_or(1.1 * c_star);
      recipe.tau = 0.5 * tau_upper_bound(recipe.max_degree, 1, recipe.c1_paths);
      const RawbfstConfig cfg = derive_config(recipe);
      report.parameters["resolved"][std::to_string(rho)] = {
          {"max_degree", cfg.max_degree}, {"c1_paths", cfg.c1_paths}, {"tau", cfg.tau},
          {"gamma_cube", cfg.gamma_cube}, {"gamma1_trunc", cfg.gamma1_trunc}, {"gamma2_trunc", cfg.gamma2_trunc}};
      const double delta = cfg.delta;
      const Target z = [delta](std::span<const double> x) { return oracle::closed_form_z(x[0], delta); };

      const auto tag = combine_keys(static_cast<std::uint64_t>(rho), std::bit_cast<std::uint64_t>(delta_inv));
      const auto reps = static_cast<std::size_t>(options.reps);
      std::vector<double> errors(reps), times(reps), truncated(reps);
      std::size_t cubes = 0;
      for_each_replicate(options.reps, [&](int rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const Estimator est = fit(model, y, cfg, replicate_seed(options.seed, tag, rep));
        const auto r = static_cast<std::size_t>(rep);
        errors[r] = l2_error(est, cfg.iota, z, GaussianMeasure{});
        truncated[r] = static_cast<double>(est.truncated_cubes());
        times[r] = seconds_since(t0);
        if (rep == 0) cubes = est.partition().size();
      });

      for (std::size_t r = 0; r < reps; ++r) {
        report.replicates.rows.push_back({delta_inv, std::int64_t{rho}, static_cast<std::int64_t>(r), errors[r],
                                          static_cast<std::int64_t>(cubes), static_cast<std::int64_t>(cfg.paths),
                                          static_cast<std::int64_t>(truncated[r]), times[r]});
      }
      const double err = rms_of(errors);
      report.replicates.rows.push_back({delta_inv, std::int64_t{rho}, std::string("all"), err,
                                        static_cast<std::int64_t>(cubes), static_cast<std::int64_t>(cfg.paths),
                                        mean_of(truncated), mean_of(times)});
      const double rate = cubes > 0 ? mean_of(truncated) / static_cast<double>(cubes) : 0.0;
      report.summary.rows.push_back({delta_inv, std::int64_t{rho}, err, oracle::discretization_error(delta),
                                     static_cast<std::int64_t>(cubes), static_cast<std::int64_t>(cfg.paths), rate,
                                     mean_of(times)});
      series.points.emplace_back(std::log10(delta_inv), std::log10(err));
    }
    if (series.points.size() >= 2) rates["rate_rho" + std::to_string(rho)] = -fit_slope(series.points);
    report.plots.push_back(std::move(series));
  }
  if (disc.points.size() >= 2) rates["rate_discretization"] = -fit_slope(disc.points);
  report.plots.push_back(std::move(disc));
  report.derived = rates;
  return report;
}

// --- UVM ----------------------------------------------------------------------

ExperimentReport run_uvm(const UvmOptions& options) {
  check_reps(options.reps);
  std::vector<int> grid = options.grid;
  if (grid.empty()) grid = {16, 32, 64, 128, 256, 512};
  std::vector<double> blocks = options.c1_blocks;
  if (blocks.empty()) blocks = {74.07, 10.0};
  options.model.validate();

  const auto& m = options.model;
  const auto& rg = options.regression;
  ExperimentReport report;
  report.experiment = "uvm";
  report.version = version();
  report.seed = options.seed;
  report.parameters = {{"grid", grid},
                       {"c1_paths", blocks},
                       {"reps", options.reps},
                       {"s0", m.s0},
                       {"mu", m.mu},
                       {"sigma_l", m.sigma_l},
                       {"sigma_h", m.sigma_h},
                       {"sigma_r", m.sigma_r},
                       {"maturity", m.maturity},
                       {"strike_low", m.strike_low},
                       {"strike_high", m.strike_high},
                       {"sigma0_sq", m.sigma0_sq},
                       {"max_degree", rg.max_degree},
                       {"gamma_cube", rg.gamma_cube},
                       {"gamma1_trunc", rg.gamma1_trunc},
                       {"gamma2_trunc", rg.gamma2_trunc},
                       {"c_cube", rg.c_cube},
                       {"c1_trunc", rg.c1_trunc},
                       {"c2_trunc", rg.c2_trunc},
                       {"path_multiplier", rg.path_multiplier},
                       {"tau", rg.tau},
                       {"reference_price", kUvmLimit}};
  report.replicates.columns = {"delta_inv", "c1_paths", "rep", "price", "paths", "truncated_cubes", "wall_time_s"};
  report.summary.columns = {"delta_inv", "c1_paths", "mean", "std", "rmse", "paths", "cubes_last_step",
                            "truncation_rate", "wall_time_s"};

  nlohmann::json rates = nlohmann::json::object();
  for (double c1 : blocks) {
    char label[32];
    std::snprintf(label, sizeof label, "%g", c1);
    PlotSeries by_steps{std::string("uvm_c1_") + label + "_error", "log10(delta_inv)", "log10(rmse)", {}};
    PlotSeries by_time{std::string("uvm_c1_") + label + "_runtime", "log10(wall_time_s)", "log10(rmse)", {}};
    for (int steps : grid) {
      uvm::UvmConfig cfg = options.model;
      cfg.steps = steps;
      uvm::UvmRegression reg = options.regression;
      reg.c1_paths = c1;
      cfg.validate();

      const auto tag = combine_keys(std::bit_cast<std::uint64_t>(c1), static_cast<std::uint64_t>(steps));
      const auto reps = static_cast<std::size_t>(options.reps);
      std::vector<double> prices(reps), times(reps), truncated(reps), cubes(reps);
      std::size_t last_cubes = 0;
      for_each_replicate(options.reps, [&](int rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = uvm::price(cfg, reg, replicate_seed(options.seed, tag, rep));
        const auto r = static_cast<std::size_t>(rep);
        prices[r] = result.price;
        double tr = 0.0;
        double cu = 0.0;
        for (const auto& st : result.trace) {
          tr += static_cast<double>(st.truncated);
          cu += static_cast<double>(st.cubes);
          if (rep == 0 && st.step == steps) last_cubes = st.cubes;
        }
        truncated[r] = tr;
        cubes[r] = cu;
        times[r] = seconds_since(t0);
      });
      const auto paths = static_cast<std::int64_t>(reg.paths(cfg.delta()));
      for (std::size_t r = 0; r < reps; ++r) {
        report.replicates.rows.push_back({static_cast<double>(steps), c1, static_cast<std::int64_t>(r), prices[r],
                                          paths, static_cast<std::int64_t>(truncated[r]), times[r]});
      }
      const double mean = mean_of(prices);
      std::vector<double> sq(reps);
      std::transform(prices.begin(), prices.end(), sq.begin(), [](double p) { return (p - kUvmLimit) * (p - kUvmLimit); });
      const double rmse = std::sqrt(mean_of(sq));
      report.replicates.rows.push_back({static_cast<double>(steps), c1, std::string("all"), mean, paths,
                                        mean_of(truncated), mean_of(times)});
      report.summary.rows.push_back({static_cast<double>(steps), c1, mean, sample_std(prices), rmse, paths,
                                     static_cast<std::int64_t>(last_cubes), mean_of(truncated) / mean_of(cubes),
                                     mean_of(times)});
      by_steps.points.emplace_back(std::log10(steps), std::log10(rmse));
      by_time.points.emplace_back(std::log10(mean_of(times)), std::log10(rmse));
    }
    if (by_steps.points.size() >= 2) rates[std::string("rate_c1_") + label] = -fit_slope(by_steps.points);
    report.plots.push_back(std::move(by_steps));
    report.plots.push_back(std::move(by_time));
  }
  report.derived = rates;
  return report;
}

// --- interpolation demo -----------------------------------------------------------

namespace {

double interp_target(const std::string& name, std::span<const double> x) {
  if (name == "constant") return 1.0;
  double v = 1.0;
  for (double c : x) v *= std::sin(2.0 * M_PI * c);
  return v;
}

// sqrt(int_[0,1]^D |y - y_hat|^2) by a 12-point Gauss-Legendre rule per cell.
double interp_l2_error(const UnitCubeInterpolant& fit, const std::string& target) {
  const auto rule = oracle::gauss_legendre(12);
  const int dim = fit.dim();
  const int n = fit.cells_per_dim();
  const std::size_t m = rule.nodes.size();
  const double cell = 1.0 / n;
  std::vector<double> x(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (std::size_t flat = 0; flat < fit.cell_count(); ++flat) {
    std::vector<int> idx(static_cast<std::size_t>(dim));
    std::size_t rem = flat;
    for (std::size_t d = idx.size(); d-- > 0;) {
      idx[d] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    std::vector<std::size_t> pos(static_cast<std::size_t>(dim), 0);
    while (true) {
      double w = 1.0;
      for (std::size_t d = 0; d < pos.size(); ++d) {
        x[d] = cell * (idx[d] + 0.5 * (rule.nodes[pos[d]] + 1.0));
        w *= 0.5 * cell * rule.weights[pos[d]];
      }
      const double diff = interp_target(target, x) - fit(x);
      total += w * diff * diff;
      std::size_t d = 0;
      while (d < pos.size() && ++pos[d] == m) pos[d++] = 0;
      if (d == pos.size()) break;
    }
  }
  return std::sqrt(total);
}

}  // namespace

ExperimentReport run_interp_demo(const InterpOptions& options) {
  check_reps(options.reps);
  if (options.dim < 1 || options.dim > 3) throw ConfigError("--dim must lie in 1..3");
  if (options.target != "sin" && options.target != "constant") {
    throw ConfigError("--target must be 'sin' or 'constant'");
  }
  if (options.grid.empty() || options.degrees.empty()) throw ConfigError("interp-demo needs a grid and degrees");

  ExperimentReport report;
  report.experiment = "interp_demo";
  report.version = version();
  report.seed = options.seed;
  report.parameters = {{"degrees", options.degrees},   {"grid", options.grid},
                       {"dim", options.dim},           {"target", options.target},
                       {"epsilon", options.epsilon},   {"c0", options.c0},
                       {"smoothness", options.smoothness},
                       {"f_lower", 1.0},               {"f_upper", 1.0},
                       {"reps", options.reps},
                       {"samples", options.samples ? nlohmann::json(*options.samples) : nlohmann::json("rule")}};
  report.replicates.columns = {"cells", "degree", "rep", "error", "samples", "truncated_cells", "wall_time_s"};
  report.summary.columns = {"cells", "degree", "error", "samples", "truncation_rate", "wall_time_s"};

  nlohmann::json slopes = nlohmann::json::object();
  for (int q : options.degrees) {
    PlotSeries series{"interp_q" + std::to_string(q), "log10(cells)", "log10(error)", {}};
    for (int n : options.grid) {
      InterpolatorConfig cfg;
      cfg.cells_per_dim = n;
      cfg.max_degree = q;
      cfg.epsilon = options.epsilon;
      const std::size_t samples =
          options.samples.value_or(required_samples(cfg, options.dim, options.smoothness, options.c0));
      const auto tag = combine_keys(static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(n));
      const auto reps = static_cast<std::size_t>(options.reps);
      std::vector<double> errors(reps), times(reps), truncated(reps);
      std::size_t cells = 0;
      for_each_replicate(options.reps, [&](int rep) {
        const auto t0 = std::chrono::steady_clock::now();
        auto rng = make_stream(replicate_seed(options.seed, tag, rep), StreamNamespace::kHarness, 0);
        Eigen::MatrixXd points(static_cast<Eigen::Index>(samples), options.dim);
        Eigen::VectorXd values(static_cast<Eigen::Index>(samples));
        std::vector<double> x(static_cast<std::size_t>(options.dim));
        for (Eigen::Index l = 0; l < points.rows(); ++l) {
          for (std::size_t d = 0; d < x.size(); ++d) {
            x[d] = rng.uniform_open();
            points(l, static_cast<Eigen::Index>(d)) = x[d];
          }
          values(l) = interp_target(options.target, x);
        }
        const auto fit = interpolate_unit_cube(points, values, cfg);
        const auto r = static_cast<std::size_t>(rep);
        errors[r] = interp_l2_error(fit, options.target);
        truncated[r] = static_cast<double>(fit.truncated_cells());
        times[r] = seconds_since(t0);
        if (rep == 0) cells = fit.cell_count();
      });
      for (std::size_t r = 0; r < reps; ++r) {
        report.replicates.rows.push_back({std::int64_t{n}, std::int64_t{q}, static_cast<std::int64_t>(r), errors[r],
                                          static_cast<std::int64_t>(samples), static_cast<std::int64_t>(truncated[r]),
                                          times[r]});
      }
      const double err = rms_of(errors);
      report.replicates.rows.push_back({std::int64_t{n}, std::int64_t{q}, std::string("all"), err,
                                        static_cast<std::int64_t>(samples), mean_of(truncated), mean_of(times)});
      report.summary.rows.push_back({std::int64_t{n}, std::int64_t{q}, err, static_cast<std::int64_t>(samples),
                                     mean_of(truncated) / static_cast<double>(cells), mean_of(times)});
      if (err > 0.0) series.points.emplace_back(std::log10(n), std::log10(err));
    }
    if (series.points.size() >= 2) slopes["slope_q" + std::to_string(q)] = fit_slope(series.points);
    report.plots.push_back(std::move(series));
  }
  report.derived = slopes;
  return report;
}

}  // namespace rawbfst::harness
