#ifndef DIAGOSC_TOOLS_SCHEMA_HPP
#define DIAGOSC_TOOLS_SCHEMA_HPP

// Versioned output schemas. CSV files start with a "# schema: <name>/<version>"
// line followed by the column header; JSON reports carry "schema" and
// "schema_version" members.

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace diagosc::cli {

inline constexpr int kSchemaVersion = 1;

inline const std::map<std::string, std::vector<std::string>>& csv_schemas() {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"diagosc.mode-curve", {"a", "mu"}},
      {"diagosc.density", {"mu", "g"}},
      {"diagosc.density-atom",
       {"epsilon", "atom_weight", "continuous_mass", "total_mass", "grid_mass", "mc_samples",
        "mc_atom_fraction", "mc_atom_se"}},
      {"diagosc.density-hist",
       {"bin_lo", "bin_hi", "observed", "expected", "mc_density", "analytic_density"}},
      {"diagosc.qc-scan", {"N", "epsilon", "sigma", "trials", "q_c_hat", "ci", "q_tilde"}},
      {"diagosc.qc-crossings", {"N", "sigma", "q", "epsilon", "bound", "bound_rederived"}},
      {"diagosc.trajectory", {}},  // t, theta_1 .. theta_N
  };
  return schemas;
}

inline const std::map<std::string, std::vector<std::string>>& json_schemas() {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"diagosc.simulate",
       {"config", "omega", "theta0", "a", "mu", "Omega_analytic", "Omega_empirical",
        "std_error", "analytic_class", "empirical_class", "marginal", "max_frequency_error"}},
      {"diagosc.verify", {"config", "checks", "passed"}},
      {"diagosc.validate-basis",
       {"n", "tolerance", "orthonormality_error", "uniform_overlap", "max_entry",
        "row_distinct", "column_distinct", "valid"}},
  };
  return schemas;
}

inline std::string schema_line(const std::string& name) {
  return "# schema: " + name + "/" + std::to_string(kSchemaVersion);
}

inline std::string join_header(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool numeric_cell(const std::string& s) {
  if (s == "nan" || s == "inf" || s == "-inf") return true;
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline std::vector<std::string> check_csv(std::istream& in) {
  std::vector<std::string> problems;
  std::string line;
  std::getline(in, line);
  const std::string prefix = "# schema: ";
  if (line.rfind(prefix, 0) != 0) return {"missing '# schema:' line"};
  const std::string tag = line.substr(prefix.size());
  const auto slash = tag.rfind('/');
  if (slash == std::string::npos) return {"schema tag without version: " + tag};
  const std::string name = tag.substr(0, slash);
  if (tag.substr(slash + 1) != std::to_string(kSchemaVersion)) {
    return {"unsupported schema version in " + tag};
  }
  const auto it = csv_schemas().find(name);
  if (it == csv_schemas().end()) return {"unknown schema " + name};
  if (!std::getline(in, line)) return {"missing column header"};
  const auto header = split_csv(line);
  if (name == "diagosc.trajectory") {
    if (header.size() < 2 || header[0] != "t") problems.push_back("trajectory header must start with t");
    for (std::size_t i = 1; i < header.size(); ++i) {
      if (header[i] != "theta_" + std::to_string(i)) {
        problems.push_back("bad trajectory column " + header[i]);
        break;
      }
    }
  } else if (header != it->second) {
    problems.push_back("header '" + line + "' does not match " + join_header(it->second));
  }
  long row = 2;
  while (std::getline(in, line)) {
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      problems.push_back("row " + std::to_string(row) + ": " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(header.size()));
    } else {
      for (const auto& c : cells) {
        if (!numeric_cell(c)) {
          problems.push_back("row " + std::to_string(row) + ": non-numeric cell '" + c + "'");
          break;
        }
      }
    }
    if (problems.size() > 20) break;
  }
  return problems;
}

inline std::vector<std::string> check_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    return {std::string("invalid JSON: ") + e.what()};
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string()) {
    return {"missing schema member"};
  }
  const auto name = doc["schema"].get<std::string>();
  const auto it = json_schemas().find(name);
  if (it == json_schemas().end()) return {"unknown schema " + name};
  if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion) {
    return {"unsupported schema_version for " + name};
  }
  std::vector<std::string> problems;
  for (const auto& key : it->second) {
    if (!doc.contains(key)) problems.push_back("missing member '" + key + "'");
  }
  return problems;
}

}  // namespace detail

/// Problems found in an emitted file; empty when it conforms.
inline std::vector<std::string> check_output_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {"cannot open " + path};
  const int first = (in >> std::ws).peek();
  if (first == '{') return detail::check_json(in);
  return detail::check_csv(in);
}

}  // namespace diagosc::cli

#endif  // DIAGOSC_TOOLS_SCHEMA_HPP
