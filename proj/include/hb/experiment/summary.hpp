#pragma once

// Run summaries (measured value, reference, tolerance, pass/fail per row) and their
// CSV / JSON serialisation. Floating values are written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hb/experiment/config.hpp"

namespace hb::exp {

enum class Role { Criterion, Diagnostic };

/// Where a reference value comes from: a published figure, an exact analytic value, or an
/// independent numerical oracle.
enum class Source { Published, Exact, Oracle };

inline const char* to_string(Role r) { return r == Role::Criterion ? "criterion" : "diagnostic"; }
inline const char* to_string(Source s) {
  switch (s) {
    case Source::Published: return "published";
    case Source::Exact: return "exact";
    case Source::Oracle: return "oracle";
  }
  return "?";
}

struct Row {
  std::string name;
  double measured = 0.0;
  double reference = 0.0;
  std::string comparison;  // "abs", "rel", "max", "min"
  double tolerance = 0.0;
  Source source = Source::Exact;
  Role role = Role::Criterion;
  bool pass = false;
};

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunSummary {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Row> rows;
  Table trials;

  bool all_pass() const {
    for (const auto& r : rows)
      if (r.role == Role::Criterion && !r.pass) return false;
    return true;
  }

  /// |measured - reference| <= tol.
  Row& check_abs(const std::string& name, double measured, double reference, double tol, Source src,
                 Role role = Role::Criterion) {
    rows.push_back({name, measured, reference, "abs", tol, src, role,
                    std::isfinite(measured) && std::abs(measured - reference) <= tol});
    return rows.back();
  }
  /// |measured - reference| <= tol |reference|.
  Row& check_rel(const std::string& name, double measured, double reference, double tol, Source src,
                 Role role = Role::Criterion) {
    rows.push_back({name, measured, reference, "rel", tol, src, role,
                    std::isfinite(measured) && std::abs(measured - reference) <= tol * std::abs(reference)});
    return rows.back();
  }
  /// measured <= bound (reference holds the bound).
  Row& check_max(const std::string& name, double measured, double bound, Source src, Role role = Role::Criterion) {
    rows.push_back({name, measured, bound, "max", 0.0, src, role, std::isfinite(measured) && measured <= bound});
    return rows.back();
  }
  /// measured >= bound.
  Row& check_min(const std::string& name, double measured, double bound, Source src, Role role = Role::Criterion) {
    rows.push_back({name, measured, bound, "min", 0.0, src, role, std::isfinite(measured) && measured >= bound});
    return rows.back();
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline nlohmann::ordered_json json_cell(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_double(*d);
    return *d;
  }
  return std::get<std::string>(c);
}

inline nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return v;
}

inline std::string trials_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += "\n";
  }
  return out;
}

inline std::string trials_json(const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) o[t.columns[i]] = json_cell(row[i]);
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

inline std::string summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["experiment"] = s.experiment;
  nlohmann::ordered_json params;
  for (const auto& [k, v] : s.parameters) params[k] = v;
  j["parameters"] = params;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : s.rows) {
    nlohmann::ordered_json o;
    o["name"] = r.name;
    o["role"] = to_string(r.role);
    o["measured"] = json_number(r.measured);
    o["reference"] = json_number(r.reference);
    o["reference_source"] = to_string(r.source);
    o["comparison"] = r.comparison;
    o["tolerance"] = json_number(r.tolerance);
    o["pass"] = r.pass;
    rows.push_back(o);
  }
  j["rows"] = rows;
  j["pass"] = s.all_pass();
  return j.dump(2) + "\n";
}

struct WrittenFiles {
  std::filesystem::path trials;
  std::filesystem::path summary;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + p.string() + "'");
  f << text;
}

inline WrittenFiles write_outputs(const RunSummary& s, const std::string& output_dir, Format format) {
  std::filesystem::create_directories(output_dir);
  WrittenFiles w;
  const std::filesystem::path dir(output_dir);
  if (format == Format::Json) {
    w.trials = dir / (s.experiment + "-trials.json");
    write_text(w.trials, trials_json(s.trials));
  } else {
    w.trials = dir / (s.experiment + "-trials.csv");
    write_text(w.trials, trials_csv(s.trials));
  }
  w.summary = dir / (s.experiment + "-summary.json");
  write_text(w.summary, summary_json(s));
  return w;
}

}  // namespace hb::exp
