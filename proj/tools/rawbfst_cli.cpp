#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rawbfst/error.hpp"
#include "rawbfst/harness.hpp"

namespace h = rawbfst::harness;

namespace {

struct Common {
  std::string grid;
  int reps = 0;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  std::string format = "both";
  std::string config;
};

void add_common(CLI::App* sub, Common& c, const char* grid_help) {
  sub->add_option("--grid", c.grid, grid_help);
  sub->add_option("--reps", c.reps, "Replications per cell");
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--format", c.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  sub->add_option("--config", c.config, "key=value file mirroring the flags; flags win");
}

h::Format to_format(const std::string& s) {
  if (s == "csv") return h::Format::kCsv;
  if (s == "json") return h::Format::kJson;
  return h::Format::kBoth;
}

template <class T>
std::vector<T> list_of(const std::string& text) {
  std::vector<T> out;
  for (double v : h::parse_list(text)) {
    if constexpr (std::is_integral_v<T>) {
      if (v != static_cast<double>(static_cast<T>(v))) throw rawbfst::ConfigError("expected integers in '" + text + "'");
    }
    out.push_back(static_cast<T>(v));
  }
  return out;
}

// Splices "--key value" pairs from a --config file between the subcommand
// name and the remaining arguments, so later command line flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const auto& [key, value] : h::read_config_file(path)) {
    out.push_back("--" + key);
    out.push_back(value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

void print_summary(const h::ExperimentReport& report, const std::vector<std::filesystem::path>& written) {
  h::write_csv(report.summary, std::cout);
  if (!report.derived.empty()) std::cout << report.derived.dump() << '\n';
  for (const auto& p : written) std::cerr << "wrote " << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAWBFST experiments: regression with brute-force SVD truncation for weighted conditional expectations"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(h::version()));

  Common sd_common;
  std::string rhos = "2,3,4";
  double sd_c1 = 0.0;
  auto* sd = app.add_subcommand("second-derivative", "Second derivative of x^2 exp(-x^2/2)");
  add_common(sd, sd_common, "Comma list of 1/Delta (default 8,16,...,16384)");
  sd->add_option("--rho", rhos, "Comma list of convergence orders")->capture_default_str();
  sd->add_option("--c1-paths", sd_c1, "Path constant (default 1.1 c*_paths)");

  Common uvm_common;
  std::string uvm_c1;
  h::UvmOptions uvm_opts;
  auto* uv = app.add_subcommand("uvm", "Call spread in the uncertain volatility model");
  add_common(uv, uvm_common, "Comma list of time step counts (default 16,32,...,512)");
  uv->add_option("--c1-paths", uvm_c1, "Comma list of path constants (default 74.07,10)");
  uv->add_option("--sigma-l", uvm_opts.model.sigma_l, "Lower volatility")->capture_default_str();
  uv->add_option("--sigma-h", uvm_opts.model.sigma_h, "Upper volatility")->capture_default_str();
  uv->add_option("--sigma-r", uvm_opts.model.sigma_r, "Reference volatility")->capture_default_str();
  uv->add_option("--sigma0-sq", uvm_opts.model.sigma0_sq, "Variance offset in C2f")->capture_default_str();

  Common in_common;
  std::string degrees = "0,1,2";
  h::InterpOptions in_opts;
  std::size_t in_samples = 0;
  auto* in = app.add_subcommand("interp-demo", "Piecewise Legendre interpolation on the unit cube");
  add_common(in, in_common, "Comma list of cells per dimension (default 4,8,16,32)");
  in->add_option("--degrees", degrees, "Comma list of polynomial degrees")->capture_default_str();
  in->add_option("--dim", in_opts.dim, "Dimension")->capture_default_str();
  in->add_option("--target", in_opts.target, "sin or constant")->capture_default_str();
  in->add_option("--epsilon", in_opts.epsilon, "Threshold slack in (0,1)")->capture_default_str();
  in->add_option("--samples", in_samples, "Sample count (default: sample-size rule)");

  try {
    const auto args = expand_config(argc, argv);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 2;
    }

    h::ExperimentReport report;
    Common* common = nullptr;
    if (sd->parsed()) {
      common = &sd_common;
      h::SecondDerivativeOptions o;
      o.rhos = list_of<int>(rhos);
      if (!sd_common.grid.empty()) o.grid = list_of<double>(sd_common.grid);
      if (sd_common.reps != 0) o.reps = sd_common.reps;
      o.seed = sd_common.seed;
      if (sd->count("--c1-paths") > 0) o.c1_paths = sd_c1;
      report = h::run_second_derivative(o);
    } else if (uv->parsed()) {
      common = &uvm_common;
      if (!uvm_common.grid.empty()) uvm_opts.grid = list_of<int>(uvm_common.grid);
      if (!uvm_c1.empty()) uvm_opts.c1_blocks = list_of<double>(uvm_c1);
      if (uvm_common.reps != 0) uvm_opts.reps = uvm_common.reps;
      uvm_opts.seed = uvm_common.seed;
      report = h::run_uvm(uvm_opts);
    } else {
      common = &in_common;
      in_opts.degrees = list_of<int>(degrees);
      if (!in_common.grid.empty()) in_opts.grid = list_of<int>(in_common.grid);
      if (in_common.reps != 0) in_opts.reps = in_common.reps;
      in_opts.seed = in_common.seed;
      if (in->count("--samples") > 0) in_opts.samples = in_samples;
      report = h::run_interp_demo(in_opts);
    }
    const auto written = h::write_outputs(report, common->out_dir, to_format(common->format));
    print_summary(report, written);
    return 0;
  } catch (const rawbfst::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const rawbfst::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
