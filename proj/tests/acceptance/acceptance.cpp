// Acceptance harness: one PASS/FAIL line per criterion. `--only N` runs a single criterion.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hb/experiment/registry.hpp"

namespace {

namespace fs = std::filesystem;
using hb::exp::RunSummary;
using hb::exp::Row;

struct Outcome {
  bool pass = true;
  std::string detail;
};

fs::path work_root = fs::temp_directory_path() / "hb_acceptance";

RunSummary run(const std::string& name, const std::vector<std::pair<std::string, std::string>>& flags,
               unsigned threads = 1) {
  const auto* info = hb::exp::find_experiment(name);
  if (!info) throw std::runtime_error("no experiment " + name);
  return info->run(hb::exp::resolve(*info, nullptr, flags), threads);
}

const Row& row(const RunSummary& s, const std::string& name) {
  for (const auto& r : s.rows)
    if (r.name == name) return r;
  throw std::runtime_error(s.experiment + ": no row '" + name + "'");
}

void add(Outcome& o, const Row& r, const std::string& label = "") {
  o.pass = o.pass && r.pass;
  std::ostringstream ss;
  ss << (label.empty() ? r.name : label) << "=" << hb::exp::format_double(r.measured)
     << (r.pass ? "" : " (fail)");
  o.detail += (o.detail.empty() ? "" : "; ") + ss.str();
}

Outcome spin_born() {
  Outcome o;
  for (const char* z : {"-0.8", "-0.4", "0", "0.4", "0.8"}) {
    const auto s = run("spin-born", {{"seed", "11"}, {"trials", "100000"}, {"z0", z}});
    add(o, row(s, "P(DOWN) vs (1 - z0)/2"), std::string("z0=") + z + " P(DOWN)");
  }
  return o;
}

Outcome ruin() {
  Outcome o;
  add(o, row(run("spin-born", {{"seed", "1"}, {"trials", "1"}}), "ruin lattice solve vs (1 - z)/2"), "max dev");
  return o;
}

Outcome curvature() {
  Outcome o;
  const auto s = run("curvature", {});
  add(o, row(s, "sectional curvature, spin generators"), "spin R");
  add(o, row(s, "sectional curvature at the oscillator vacuum"), "vacuum R");
  add(o, row(s, "curvature after rescaling generators"), "rescaled R");
  return o;
}

Outcome bridge() {
  Outcome o;
  const auto s = run("born-bridge", {{"seed", "3"}, {"trials", "50"}});
  add(o, row(s, "max |exp(-|a-b|^2 / 4 sigma^2) - cos^2 theta|"), "max dev");
  add(o, row(s, "max relative |prob - density x (4 pi sigma^2)^(d/2)|"), "born-normal");
  return o;
}

Outcome decomposition() {
  Outcome o;
  const auto s = run("decomposition", {});
  add(o, row(s, "|h psi|^2 / hbar^2 vs sum of squared components (relative)"), "residual");
  add(o, row(s, "space component vs v / 2 sigma"), "space");
  add(o, row(s, "momentum component vs m w sigma / hbar"), "momentum");
  add(o, row(s, "spread component vs sqrt 2 hbar / 8 sigma^2 m"), "spread");
  return o;
}

Outcome speed() {
  Outcome o;
  const auto s = run("uncertainty-identity", {{"seed", "5"}, {"trials", "1"}, {"speed_n", "16"}});
  add(o, row(s, "projective speed vs Delta E / hbar (max relative deviation)"), "max rel dev");
  return o;
}

Outcome uncertainty() {
  Outcome o;
  const auto s = run("uncertainty-identity", {{"seed", "5"}, {"trials", "100"}, {"max_n", "16"}});
  add(o, row(s, "max relative residual of Var A Var B = area^2 + inner^2"), "max residual");
  add(o, row(s, "uncertainty inequality violations"), "violations");
  return o;
}

Outcome hamiltonian() {
  Outcome o;
  const auto s = run("hamiltonian-reconstruct", {{"n", "24"}});
  add(o, row(s, "interior-band error, V = zero"), "V=0");
  add(o, row(s, "interior-band error, V = half_x2"), "V=x^2/2");
  return o;
}

Outcome position_born() {
  Outcome o;
  const auto s8 = run("position-born", {{"seed", "13"}, {"trials", "20000"}, {"cells", "8"}});
  add(o, row(s8, "unresolved fraction"), "N=8 unresolved");
  add(o, row(s8, "chi-square p-value vs |C_n|^2 (resolved trials)"), "N=8 chi2 p");
  const auto s2 = run("position-born", {{"seed", "13"}, {"trials", "10000"}, {"cells", "2"}, {"cross_check", "true"},
                                        {"max_steps", "100000"}});
  add(o, row(s2, "N=2 P(cell 0) minus spin P(DOWN)"), "N=2 minus spin");
  return o;
}

Outcome diagonal() {
  Outcome o;
  add(o, row(run("isotropy", {{"seed", "2"}, {"trials", "1000"}, {"diag_steps", "10000"}}),
             "diagonal walk max ||C_n| - |C_n(0)|| (polar)"),
      "max modulus drift");
  return o;
}

Outcome estimates() {
  Outcome o;
  const auto a = run("estimates", {{"lambda", "1e-9"}});
  add(o, row(a, "log10 velocity term"), "1e-9 v");
  add(o, row(a, "log10 acceleration term"), "1e-9 a");
  add(o, row(a, "log10 spreading term"), "1e-9 s");
  add(o, row(a, "log10 photon density at 500 K"), "N(500K)");
  const auto b = run("estimates", {{"lambda", "1e-5"}});
  add(o, row(b, "log10 velocity term"), "1e-5 v");
  add(o, row(b, "log10 acceleration term"), "1e-5 a");
  add(o, row(b, "log10 spreading term"), "1e-5 s");
  return o;
}

Outcome continuity() {
  Outcome o;
  const auto s = run("continuity", {});
  add(o, row(s, "continuity residual order under (h, dt) halving"), "order");
  add(o, row(s, "packet current vs (p/m)|psi|^2 (relative)"), "current");
  return o;
}

Outcome diffusion() {
  Outcome o;
  const auto s = run("diffusion", {{"seed", "17"}, {"trials", "100000"}});
  add(o, row(s, "MSD slope vs 2 d K"), "slope");
  add(o, row(s, "radial CDF max band deviation (sigmas)"), "band z");
  add(o, row(s, "radial CDF KS p-value (4 sigma level)"), "KS p");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> cases = {
      {"spin-born", {{"seed", "21"}, {"trials", "400"}}},
      {"position-born", {{"seed", "21"}, {"trials", "200"}, {"cells", "4"}, {"max_steps", "200"}}},
      {"isotropy", {{"seed", "21"}, {"trials", "2000"}, {"diag_steps", "100"}}},
      {"diffusion", {{"seed", "21"}, {"trials", "5000"}}},
      {"state-msd", {{"seed", "21"}, {"trials", "500"}}},
      {"uncertainty-identity", {{"seed", "21"}, {"trials", "20"}}},
      {"born-bridge", {{"seed", "21"}, {"trials", "6"}}},
      {"curvature", {}},
  };
  int identical = 0;
  for (const auto& [name, flags] : cases) {
    std::vector<std::string> texts;
    for (const auto& [workers, format] : std::vector<std::pair<unsigned, std::string>>{
             {1, "csv"}, {8, "csv"}, {1, "csv"}, {8, "json"}, {1, "json"}}) {
      auto f = flags;
      const fs::path dir = work_root / "determinism" / (name + "-" + std::to_string(texts.size()));
      f.emplace_back("output_dir", dir.string());
      f.emplace_back("format", format);
      const auto* info = hb::exp::find_experiment(name);
      const auto cfg = hb::exp::resolve(*info, nullptr, f);
      const auto files = hb::exp::write_outputs(info->run(cfg, workers), cfg.output_dir, cfg.format);
      texts.push_back(slurp(files.trials) + "\x1f" + slurp(files.summary));
    }
    const bool same = texts[0] == texts[1] && texts[0] == texts[2] && texts[3] == texts[4];
    if (same) ++identical;
    else o.detail += (o.detail.empty() ? "" : "; ") + name + " differs";
    o.pass = o.pass && same;
  }
  o.detail = std::to_string(identical) + "/" + std::to_string(cases.size()) +
             " experiments byte-identical at 1 and 8 workers" + (o.detail.empty() ? "" : " (" + o.detail + ")");
  return o;
}

struct Criterion {
  int id;
  std::string title;
  Outcome (*check)();
};

const std::vector<Criterion> criteria = {
    {1, "spin walk outcome frequencies vs (1 - z0)/2", spin_born},
    {2, "gambler's ruin lattice solve vs (1 - z)/2", ruin},
    {3, "sectional curvature = 1 and scale invariance", curvature},
    {4, "Gaussian overlap vs Fubini-Study angle, Born vs normal density", bridge},
    {5, "velocity decomposition of a packet in a linear potential", decomposition},
    {6, "projective speed vs energy uncertainty", speed},
    {7, "uncertainty identity on random instances", uncertainty},
    {8, "Hamiltonian reconstruction from commutators", hamiltonian},
    {9, "cell-lattice walk outcome frequencies vs |C_n|^2", position_born},
    {10, "diagonal walk preserves moduli", diagonal},
    {11, "order-of-magnitude estimates", estimates},
    {12, "continuity residual order and packet current", continuity},
    {13, "Brownian ensemble MSD slope and radial law", diffusion},
    {14, "byte-identical outputs across worker counts", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string work;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 14));
  app.add_option("--work", work, "scratch directory for output files");
  CLI11_PARSE(app, argc, argv);
  if (!work.empty()) work_root = work;

  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << "  [" << o.detail
              << "]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
