#pragma once

// Experiment table, configuration resolution and validation.

#include <functional>
#include <set>

#include "hb/experiment/geometry.hpp"
#include "hb/experiment/walks.hpp"

namespace hb::exp {

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::string topic;
  bool stochastic = false;
  std::function<std::vector<ParamDef>()> params;
  std::function<RunSummary(const ExperimentConfig&, unsigned)> run;
};

inline const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> table = {
      {"spin-born", "random-field spin walk, outcome frequencies vs (1 - z0)/2", "measurement", true,
       spin_born_params, run_spin_born},
      {"position-born", "cell-lattice diagonal walk, cell frequencies vs |C_k|^2", "measurement", true,
       position_born_params, run_position_born},
      {"isotropy", "isotropy of the random state displacement (spin and cells)", "measurement", true,
       isotropy_params, run_isotropy},
      {"diffusion", "Brownian ensemble: MSD slope and radial heat-kernel law", "diffusion", true, diffusion_params,
       run_diffusion},
      {"state-msd", "early-time mean squared Fubini-Study displacement", "diffusion", true, state_msd_params,
       run_state_msd},
      {"curvature", "sectional curvature of the projective space on spin and oscillator planes", "geometry", false,
       curvature_params, run_curvature},
      {"uncertainty-identity", "Var A Var B = area^2 + inner^2 and projective speed", "geometry", true,
       uncertainty_params, run_uncertainty},
      {"decomposition", "velocity decomposition of a Gaussian packet", "dynamics", false, decomposition_params,
       run_decomposition},
      {"ehrenfest", "Ehrenfest relations for packets and superpositions", "dynamics", false, ehrenfest_params,
       run_ehrenfest},
      {"hamiltonian-reconstruct", "recover H from its commutators with x and p", "dynamics", false,
       hamiltonian_params, run_hamiltonian},
      {"born-bridge", "transition probability vs Euclidean distance of packet centres", "born", true,
       born_bridge_params, run_born_bridge},
      {"action-equivalence", "action of embedded classical paths", "kernel", false, action_params, run_action},
      {"continuity", "continuity equation convergence and packet current", "diffusion", false, continuity_params,
       run_continuity},
      {"estimates", "order-of-magnitude table for electron measurement by photons", "estimates", false,
       estimates_params, run_estimates},
  };
  return table;
}

inline const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return &e;
  return nullptr;
}

inline std::vector<ParamDef> common_params(const ExperimentInfo& e) {
  std::vector<ParamDef> p = {
      {"output_dir", ParamType::Text, ".", "directory for result files"},
      {"format", ParamType::Choice, "csv", "trial table format", {"csv", "json"}},
  };
  if (e.stochastic) {
    p.push_back({"seed", ParamType::Int, "", "master seed", {}, true});
    p.push_back({"trials", ParamType::Int, "", "number of trials (walkers, pairs or instances)", {}, true});
  }
  return p;
}

inline std::vector<ParamDef> schema(const ExperimentInfo& e) {
  auto p = common_params(e);
  for (auto& q : e.params()) p.push_back(q);
  return p;
}

inline std::optional<std::string> check_value(const ParamDef& param, const std::string& value) {
  bool ok = true;
  switch (param.type) {
    case ParamType::Int: ok = parse_int(value).has_value(); break;
    case ParamType::Real: ok = parse_real(value).has_value(); break;
    case ParamType::Vec: ok = parse_vec(value).has_value(); break;
    case ParamType::Flag: ok = parse_flag(value).has_value(); break;
    case ParamType::Choice:
      ok = std::find(param.choices.begin(), param.choices.end(), value) != param.choices.end();
      break;
    case ParamType::Text: ok = !value.empty(); break;
  }
  if (ok) return std::nullopt;
  return type_error(param, value);
}

/// Merge defaults, the config file (top-level keys, [global], then [<experiment>]) and flags, in that order.
inline ExperimentConfig resolve(const ExperimentInfo& e, const ConfigFile* file,
                                const std::vector<std::pair<std::string, std::string>>& flags) {
  const auto sch = schema(e);
  ExperimentConfig c;
  c.experiment = e.name;
  for (const auto& p : sch) c.values[p.name] = p.fallback;
  auto apply = [&](const std::string& key, const std::string& value, const std::string& where) {
    const auto it = std::find_if(sch.begin(), sch.end(), [&](const ParamDef& p) { return p.name == key; });
    if (it == sch.end()) throw UsageError(where + "unknown parameter '" + key + "' for " + e.name);
    if (auto err = check_value(*it, value)) throw UsageError(where + *err);
    c.values[key] = value;
  };
  if (file) {
    for (const std::string& sec : {std::string(), std::string("global"), e.name}) {
      const auto it = file->sections.find(sec);
      if (it == file->sections.end()) continue;
      for (const auto& [k, entry] : it->second) {
        // global keys that do not belong to this experiment are skipped
        if (sec != e.name &&
            std::none_of(sch.begin(), sch.end(), [&](const ParamDef& p) { return p.name == k; }))
          continue;
        apply(k, entry.value, "line " + std::to_string(entry.line) + ": ");
      }
    }
  }
  for (const auto& [k, v] : flags) apply(k, v, "");
  for (const auto& p : sch)
    if (p.required && c.values[p.name].empty())
      throw UsageError("'" + p.name + "' is required for " + e.name);
  c.output_dir = c.values["output_dir"];
  c.format = c.values["format"] == "json" ? Format::Json : Format::Csv;
  return c;
}

/// Check every section of a config file against the schemas; one diagnostic per problem.
inline std::vector<Diagnostic> validate(const ConfigFile& file) {
  std::vector<Diagnostic> out;
  std::set<std::string> global_known;
  for (const auto& e : experiments())
    for (const auto& p : schema(e)) global_known.insert(p.name);
  std::vector<std::string> names = file.order;
  names.insert(names.begin(), std::string());
  for (const auto& name : names) {
    const auto sit = file.sections.find(name);
    if (sit == file.sections.end()) continue;
    const auto& entries = sit->second;
    if (name.empty() || name == "global") {
      for (const auto& [k, entry] : entries) {
        if (!global_known.count(k)) {
          out.push_back({entry.line, "unknown parameter '" + k + "'"});
          continue;
        }
        // type-check against the first schema that declares the key
        for (const auto& e : experiments()) {
          const auto sch = schema(e);
          const auto it = std::find_if(sch.begin(), sch.end(), [&](const ParamDef& p) { return p.name == k; });
          if (it == sch.end()) continue;
          if (auto err = check_value(*it, entry.value)) out.push_back({entry.line, *err});
          break;
        }
      }
      continue;
    }
    const auto* e = find_experiment(name);
    if (!e) {
      out.push_back({file.section_line.at(name), "unknown experiment '" + name + "'"});
      continue;
    }
    const auto sch = schema(*e);
    for (const auto& [k, entry] : entries) {
      const auto it = std::find_if(sch.begin(), sch.end(), [&](const ParamDef& p) { return p.name == k; });
      if (it == sch.end()) {
        out.push_back({entry.line, "unknown parameter '" + k + "' for " + name});
        continue;
      }
      if (auto err = check_value(*it, entry.value)) out.push_back({entry.line, *err});
    }
    for (const auto& p : sch) {
      if (!p.required || entries.count(p.name)) continue;
      const auto in_global = [&](const char* sec) {
        const auto g = file.sections.find(sec);
        return g != file.sections.end() && g->second.count(p.name) > 0;
      };
      if (in_global("") || in_global("global")) continue;
      out.push_back({file.section_line.at(name), "'" + p.name + "' is required for " + name});
    }
  }
  std::sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  return out;
}

}  // namespace hb::exp
