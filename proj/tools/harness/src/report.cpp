#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rawbfst/error.hpp"
#include "rawbfst/harness.hpp"

#ifndef RAWBFST_VERSION
#define RAWBFST_VERSION "0.0.0"
#endif

namespace rawbfst::harness {

const char* version() { return RAWBFST_VERSION; }

namespace {

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(c));
  return buf;
}

nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, c);
}

nlohmann::json table_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t k = 0; k < t.columns.size(); ++k) obj[t.columns[k]] = cell_json(row[k]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_cell(row[k]);
    out << '\n';
  }
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["version"] = report.version;
  j["seed"] = report.seed;
  j["parameters"] = report.parameters;
  j["rows"] = table_json(report.summary);
  j["derived"] = report.derived;
  return j;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report, const std::filesystem::path& dir,
                                                 Format format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    written.push_back(path);
    return out;
  };
  if (format != Format::kJson) {
    auto out = open(report.experiment + ".csv");
    write_csv(report.replicates, out);
  }
  if (format != Format::kCsv) {
    auto out = open(report.experiment + ".json");
    out << to_json(report).dump(2) << '\n';
  }
  for (const auto& series : report.plots) {
    auto out = open(series.name + ".dat");
    out << "# " << series.x_label << ' ' << series.y_label << '\n';
    char buf[64];
    for (const auto& [x, y] : series.points) {
      std::snprintf(buf, sizeof buf, "%.10g %.10g\n", x, y);
      out << buf;
    }
  }
  return written;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw ConfigError("malformed list entry '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

}  // namespace rawbfst::harness
