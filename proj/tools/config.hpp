#ifndef DIAGOSC_TOOLS_CONFIG_HPP
#define DIAGOSC_TOOLS_CONFIG_HPP

// Experiment configuration for the diagosc runner.
//
// File format: one `key = value` per line, `#` starts a comment, optional
// `[section]` headers. Keys outside a section apply to every subcommand; keys
// inside `[qc-scan]` etc. apply only to that subcommand and override the
// top-level value. Values are numbers, strings (quoted or bare) or lists
// `[v1, v2, ...]`.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace diagosc::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> names = {"mode-curve", "density",  "qc-scan",
                                              "simulate",   "verify",   "validate-basis"};
  return names;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",        "threads",       "out",          "n",           "n_list",
      "epsilon",     "epsilon_min",   "epsilon_max",  "epsilon_steps", "sigma",
      "mean",        "distribution",  "mode",         "trials",      "t_end",
      "a_min",       "a_max",         "a_step",       "mu_min",      "mu_max",
      "mu_step",     "samples",       "bins",         "basis",       "burn_in",
      "confidence",  "tolerance",     "pair_tol",     "trend_sizes", "trend_trials",
      "clt_n",       "clt_samples",   "separation_t_end", "q",
      "omega",       "theta0"};
  return keys;
}

/// Raw key -> value text; lists keep their bracketed form.
using RawValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace detail

/// Parses config text for `command`. Unknown keys and sections are rejected.
inline RawValues parse_config_text(const std::string& text, const std::string& command,
                                   const std::string& origin = "config") {
  RawValues global, local;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string::npos) {
      section = detail::trim(body.substr(1, body.size() - 2));
      if (!known_commands().count(section)) {
        throw ConfigError(where() + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(where() + "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where() + "empty value for '" + key + "'");
    RawValues& target = section.empty() ? global : local;
    if (section.empty() || section == command) {
      if (target.count(key)) throw ConfigError(where() + "duplicate key '" + key + "'");
      target[key] = value;
    }
  }
  for (auto& [k, v] : local) global[k] = v;
  return global;
}

inline RawValues load_config_file(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), command, path);
}

/// Typed view over raw values with range checks.
class ConfigReader {
 public:
  explicit ConfigReader(RawValues values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, detail::unquote(values_.at(key)));
  }

  double positive(const std::string& key, double fallback) const {
    const double v = real(key, fallback);
    if (!(v > 0.0)) throw ConfigError(key + " must be > 0");
    return v;
  }

  double nonnegative(const std::string& key, double fallback) const {
    const double v = real(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(key + " must be >= 0");
    return v;
  }

  long integer(const std::string& key, long fallback, long min_value,
               long max_value = std::numeric_limits<long>::max()) const {
    if (!has(key)) return fallback;
    const long v = parse_integer(key, detail::unquote(values_.at(key)));
    if (v < min_value || v > max_value) {
      throw ConfigError(key + " must be in [" + std::to_string(min_value) + ", " +
                        std::to_string(max_value) + "]");
    }
    return v;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string text = detail::unquote(values_.at(key));
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError(key + " must be a non-negative integer");
    }
    try {
      return std::stoull(text);
    } catch (const std::exception&) {
      throw ConfigError(key + " is out of range");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return detail::unquote(values_.at(key));
  }

  std::vector<long> integer_list(const std::string& key, std::vector<long> fallback,
                                 long min_value) const {
    if (!has(key)) return fallback;
    std::vector<long> out;
    for (const auto& item : split_list(key)) {
      const long v = parse_integer(key, item);
      if (v < min_value) throw ConfigError(key + " entries must be >= " + std::to_string(min_value));
      out.push_back(v);
    }
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
  }

  std::vector<double> real_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(key)) out.push_back(parse_real(key, item));
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) {
      throw ConfigError(key + ": '" + s + "' is not a finite number");
    }
    return v;
  }

  static long parse_integer(const std::string& key, const std::string& s) {
    const double v = parse_real(key, s);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) {
      throw ConfigError(key + ": '" + s + "' is not an integer");
    }
    return static_cast<long>(v);
  }

  std::vector<std::string> split_list(const std::string& key) const {
    std::string v = detail::trim(values_.at(key));
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      return {detail::unquote(v)};  // a scalar is a one-element list
    }
    v = v.substr(1, v.size() - 2);
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) throw ConfigError(key + ": empty list entry");
      items.push_back(detail::unquote(item));
    }
    return items;
  }

  RawValues values_;
};

}  // namespace diagosc::cli

#endif  // DIAGOSC_TOOLS_CONFIG_HPP
