#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rawbfst/uvm.hpp"

// Experiment drivers behind the `rawbfst` command line tool.
namespace rawbfst::harness {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Two-column series for external plotting.
struct PlotSeries {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

struct ExperimentReport {
  std::string experiment;
  std::string version;
  std::uint64_t seed = 0;
  nlohmann::json parameters;  ///< resolved inputs, enough to replay the run
  Table replicates;           ///< one row per (cell, replicate) plus one aggregate row per cell
  Table summary;              ///< one row per cell
  nlohmann::json derived;     ///< fitted slopes and similar
  std::vector<PlotSeries> plots;
};

enum class Format { kCsv, kJson, kBoth };

struct SecondDerivativeOptions {
  std::vector<int> rhos{2, 3, 4};
  std::vector<double> grid;  ///< Delta^-1 values; empty means 2^3 .. 2^14
  int reps = 100;
  std::uint64_t seed = 1;
  std::optional<double> c1_paths;  ///< default 1.1 c*_paths(Q, 1)
};

struct UvmOptions {
  std::vector<int> grid;              ///< time steps N; empty means 16 .. 512
  std::vector<double> c1_blocks;      ///< empty means {74.07, 10}
  int reps = 100;
  std::uint64_t seed = 1;
  uvm::UvmConfig model;               ///< `steps` is overwritten per grid point
  uvm::UvmRegression regression;      ///< `c1_paths` is overwritten per block
};

struct InterpOptions {
  std::vector<int> degrees{0, 1, 2};
  std::vector<int> grid{4, 8, 16, 32};  ///< cells per dimension N
  int dim = 1;
  std::string target = "sin";           ///< "sin" or "constant"
  double epsilon = 0.5;
  double c0 = 1.0;
  double smoothness = 1.0;              ///< gamma in the sample-size rule
  std::optional<std::size_t> samples;   ///< overrides the sample-size rule
  int reps = 1;
  std::uint64_t seed = 1;
};

ExperimentReport run_second_derivative(const SecondDerivativeOptions& options);
ExperimentReport run_uvm(const UvmOptions& options);
ExperimentReport run_interp_demo(const InterpOptions& options);

/// Seed of replicate `rep` within the cell identified by `cell_tag`.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t cell_tag, int rep);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<std::pair<double, double>>& points);

/// Pairwise summation; the result does not depend on thread scheduling.
double pairwise_sum(std::span<const double> values);

void write_csv(const Table& table, std::ostream& out);
nlohmann::json to_json(const ExperimentReport& report);

/// Writes <experiment>.csv and/or <experiment>.json plus one .dat file per plot series.
/// Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                                                 Format format);

/// key=value lines, '#' comments; returns (key, value) pairs in file order.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// "16,128,1024" -> {16, 128, 1024}; throws ConfigError on malformed input.
std::vector<double> parse_list(const std::string& text);

const char* version();

}  // namespace rawbfst::harness
