// Command-line front end: hb list | hb validate <file> | hb run <experiment> [--key value ...]

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "hb/experiment/registry.hpp"

namespace {

using hb::exp::UsageError;

std::vector<std::pair<std::string, std::string>> key_values(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw UsageError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw UsageError("missing value for --" + key);
      value = extras[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    out.emplace_back(key, value);
  }
  return out;
}

int list() {
  for (const auto& e : hb::exp::experiments()) {
    std::cout << e.name << "  [" << e.topic << (e.stochastic ? ", stochastic" : "") << "]  " << e.description << "\n";
    for (const auto& p : hb::exp::schema(e)) {
      std::cout << "    --" << p.name << " <" << hb::exp::to_string(p.type) << ">";
      if (p.required) std::cout << " (required)";
      else std::cout << " = " << p.fallback;
      if (!p.choices.empty()) {
        std::cout << " {";
        for (std::size_t i = 0; i < p.choices.size(); ++i) std::cout << (i ? "," : "") << p.choices[i];
        std::cout << "}";
      }
      std::cout << "  " << p.help << "\n";
    }
  }
  return 0;
}

int validate(const std::string& path) {
  std::vector<hb::exp::Diagnostic> diags;
  const auto file = hb::exp::parse_config_file(path, diags);
  for (auto& d : hb::exp::validate(file)) diags.push_back(d);
  std::sort(diags.begin(), diags.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
  for (const auto& d : diags) std::cerr << d.str(path) << "\n";
  if (diags.empty()) std::cout << path << ": ok\n";
  return diags.empty() ? 0 : 2;
}

int run(const std::string& name, const std::string& config_path, const std::vector<std::string>& extras) {
  const auto* info = hb::exp::find_experiment(name);
  if (!info) throw UsageError("unknown experiment '" + name + "' (see 'hb list')");
  std::optional<hb::exp::ConfigFile> file;
  if (!config_path.empty()) {
    std::vector<hb::exp::Diagnostic> diags;
    file = hb::exp::parse_config_file(config_path, diags);
    if (!diags.empty()) throw UsageError(diags.front().str(config_path));
  }
  const auto cfg = hb::exp::resolve(*info, file ? &*file : nullptr, key_values(extras));
  const unsigned threads = hb::worker_count();
  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = info->run(cfg, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto files = hb::exp::write_outputs(summary, cfg.output_dir, cfg.format);

  for (const auto& r : summary.rows) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << "[" << hb::exp::to_string(r.role) << "] " << r.name << ": "
              << hb::exp::format_double(r.measured);
    if (r.comparison == "max") std::cout << " <= " << hb::exp::format_double(r.reference);
    else if (r.comparison == "min") std::cout << " >= " << hb::exp::format_double(r.reference);
    else
      std::cout << " vs " << hb::exp::format_double(r.reference) << " (" << r.comparison << " tol "
                << hb::exp::format_double(r.tolerance) << ")";
    std::cout << "\n";
  }
  std::cout << "trials:  " << files.trials.string() << "\nsummary: " << files.summary.string() << "\n";
  std::cout << "workers: " << threads << "  wall time: " << wall << " s\n";
  std::cout << (summary.all_pass() ? "result: pass" : "result: fail") << "\n";
  return summary.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && hb::exp::find_experiment(args.front())) args.insert(args.begin(), "run");

  CLI::App app{"Hilbert-bundle measurement and geometry experiments"};
  app.require_subcommand(1);
  auto* list_cmd = app.add_subcommand("list", "list experiments and their parameters");
  std::string vpath;
  auto* val_cmd = app.add_subcommand("validate", "check a config file");
  val_cmd->add_option("path", vpath, "config file")->required();
  std::string exp_name, config_path;
  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  run_cmd->add_option("experiment", exp_name, "experiment name")->required();
  run_cmd->add_option("--config", config_path, "config file");
  run_cmd->allow_extras();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*list_cmd) return list();
    if (*val_cmd) return validate(vpath);
    return run(exp_name, config_path, run_cmd->remaining());
  } catch (const UsageError& e) {
    std::cerr << "hb: " << e.what() << "\n";
    return 2;
  } catch (const hb::Error& e) {
    std::cerr << "hb: " << e.what() << "\n";
    return 2;
  }
}
