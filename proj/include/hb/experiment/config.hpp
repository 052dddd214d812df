#pragma once

// Experiment configuration: typed parameter schemas, the `key = value` file format with
// [experiment] sections, and validation diagnostics with line numbers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hb/core.hpp"

namespace hb::exp {

enum class ParamType { Int, Real, Vec, Text, Choice, Flag };

inline const char* to_string(ParamType t) {
  switch (t) {
    case ParamType::Int: return "integer";
    case ParamType::Real: return "real";
    case ParamType::Vec: return "vector";
    case ParamType::Text: return "text";
    case ParamType::Choice: return "choice";
    case ParamType::Flag: return "flag";
  }
  return "?";
}

struct ParamDef {
  std::string name;
  ParamType type = ParamType::Real;
  std::string fallback;  // empty with required = true means the key must be given
  std::string help;
  std::vector<std::string> choices;
  bool required = false;
};

enum class Format { Csv, Json };

/// Usage errors: bad flags, unknown experiments, invalid values. Mapped to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<long long> parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (...) {
  }
  // Accept integral values written in exponent form, e.g. 1e5.
  try {
    std::size_t pos = 0;
    const double d = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15)
      return static_cast<long long>(d);
  } catch (...) {
  }
  return std::nullopt;
}

inline std::optional<double> parse_real(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(v)) return v;
  } catch (...) {
  }
  return std::nullopt;
}

/// Comma-separated reals, e.g. "1, 0, 0".
inline std::optional<std::vector<double>> parse_vec(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_real(trim(item));
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty() || out.size() > 3) return std::nullopt;
  return out;
}

inline std::optional<bool> parse_flag(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

/// Empty string when the value has the declared type, else a diagnostic.
inline std::string type_error(const ParamDef& param, const std::string& value) {
  bool ok = true;
  switch (param.type) {
    case ParamType::Int: ok = parse_int(value).has_value(); break;
    case ParamType::Real: ok = parse_real(value).has_value(); break;
    case ParamType::Vec: ok = parse_vec(value).has_value(); break;
    case ParamType::Flag: ok = parse_flag(value).has_value(); break;
    case ParamType::Choice:
      ok = std::find(param.choices.begin(), param.choices.end(), value) != param.choices.end();
      if (!ok) {
        std::string list;
        for (const auto& c : param.choices) list += (list.empty() ? "" : ", ") + c;
        return "'" + param.name + "' must be one of {" + list + "}, got '" + value + "'";
      }
      break;
    case ParamType::Text: break;
  }
  if (ok) return "";
  return "'" + param.name + "' expects a " + to_string(param.type) + " value, got '" + value + "'";
}

/// Resolved configuration of one run.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;  // every schema key, defaults filled in
  std::string output_dir = ".";
  Format format = Format::Csv;

  const std::string& raw(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw UsageError("parameter '" + key + "' is not defined for " + experiment);
    return it->second;
  }
  bool has(const std::string& key) const { return values.count(key) && !values.at(key).empty(); }
  long long integer(const std::string& key) const {
    const auto v = parse_int(raw(key));
    if (!v) throw UsageError("'" + key + "' is not an integer");
    return *v;
  }
  std::uint64_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw UsageError("'" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  double real(const std::string& key) const {
    const auto v = parse_real(raw(key));
    if (!v) throw UsageError("'" + key + "' is not a real number");
    return *v;
  }
  Vec3 vec(const std::string& key) const {
    const auto v = parse_vec(raw(key));
    if (!v) throw UsageError("'" + key + "' is not a vector");
    Vec3 out = Vec3::Zero();
    for (std::size_t i = 0; i < v->size(); ++i) out[static_cast<Eigen::Index>(i)] = (*v)[i];
    return out;
  }
  bool flag(const std::string& key) const {
    const auto v = parse_flag(raw(key));
    if (!v) throw UsageError("'" + key + "' is not a flag");
    return *v;
  }
  const std::string& text(const std::string& key) const { return raw(key); }
};

struct Entry {
  std::string value;
  int line = 0;
};

struct ConfigFile {
  std::map<std::string, std::map<std::string, Entry>> sections;  // "" holds keys before any section
  std::vector<std::string> order;                                // section names in file order
  std::map<std::string, int> section_line;
};

struct Diagnostic {
  int line = 0;  // 0 when not tied to a line
  std::string message;
  std::string str(const std::string& path) const {
    return path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message;
  }
};

/// Parses the line-oriented format. `#` and `;` start comments.
inline ConfigFile parse_config_text(const std::string& text, std::vector<Diagnostic>& diags) {
  ConfigFile cf;
  cf.sections[""];
  std::string current;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) {
        diags.push_back({ln, "malformed section header '" + body + "'"});
        continue;
      }
      current = trim(body.substr(1, body.size() - 2));
      if (cf.sections.count(current) && current != "") diags.push_back({ln, "duplicate section [" + current + "]"});
      cf.sections[current];
      cf.order.push_back(current);
      cf.section_line[current] = ln;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      diags.push_back({ln, "expected 'key = value', got '" + body + "'"});
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      diags.push_back({ln, "missing key before '='"});
      continue;
    }
    auto& sec = cf.sections[current];
    if (sec.count(key)) diags.push_back({ln, "duplicate key '" + key + "'"});
    sec[key] = {value, ln};
  }
  return cf;
}

inline ConfigFile parse_config_file(const std::string& path, std::vector<Diagnostic>& diags) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), diags);
}

}  // namespace hb::exp
