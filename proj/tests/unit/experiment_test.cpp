#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "hb/experiment/registry.hpp"

namespace {

using namespace hb::exp;
namespace fs = std::filesystem;

ConfigFile parse(const std::string& text, std::vector<Diagnostic>& diags) { return parse_config_text(text, diags); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hb_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), {}};
}

TEST(ConfigParse, SectionsCommentsAndLines) {
  std::vector<Diagnostic> d;
  const auto cf = parse("seed = 4  # top\n\n[global]\ntrials=10\n; note\n[spin-born]\nz0 = -0.2\n", d);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(cf.sections.at("").at("seed").value, "4");
  EXPECT_EQ(cf.sections.at("global").at("trials").line, 4);
  EXPECT_EQ(cf.sections.at("spin-born").at("z0").value, "-0.2");
  EXPECT_EQ(cf.order, (std::vector<std::string>{"global", "spin-born"}));
  EXPECT_EQ(cf.section_line.at("spin-born"), 6);
}

TEST(ConfigParse, Diagnostics) {
  std::vector<Diagnostic> d;
  parse("[broken\nnovalue\n = 3\n[a]\nx = 1\nx = 2\n[a]\n", d);
  ASSERT_EQ(d.size(), 5u);
  EXPECT_EQ(d[0].line, 1);
  EXPECT_EQ(d[1].line, 2);
  EXPECT_EQ(d[2].line, 3);
  EXPECT_NE(d[3].message.find("duplicate key"), std::string::npos);
  EXPECT_NE(d[4].message.find("duplicate section"), std::string::npos);
  EXPECT_EQ(d[3].str("f.conf"), "f.conf:6: duplicate key 'x'");
}

TEST(ConfigValues, TypedParsing) {
  EXPECT_EQ(parse_int("1e5"), 100000);
  EXPECT_FALSE(parse_int("1.5"));
  EXPECT_FALSE(parse_real("nan"));
  EXPECT_EQ(parse_vec("1, 0,2")->size(), 3u);
  EXPECT_FALSE(parse_vec("1,2,3,4"));
  EXPECT_EQ(parse_flag("on"), true);
  EXPECT_FALSE(parse_flag("maybe"));
}

TEST(Resolve, PrecedenceFileGlobalSectionFlags) {
  std::vector<Diagnostic> d;
  const auto cf = parse("seed = 1\ntrials = 5\n[global]\nseed = 2\nsigma = 0.1\n[spin-born]\nseed = 3\n", d);
  const auto* e = find_experiment("spin-born");
  ASSERT_NE(e, nullptr);
  auto c = resolve(*e, &cf, {});
  EXPECT_EQ(c.integer("seed"), 3);
  EXPECT_EQ(c.integer("trials"), 5);
  EXPECT_DOUBLE_EQ(c.real("z0"), 0.4);
  c = resolve(*e, &cf, {{"seed", "9"}, {"format", "json"}});
  EXPECT_EQ(c.integer("seed"), 9);
  EXPECT_EQ(c.format, Format::Json);
}

TEST(Resolve, Errors) {
  const auto* e = find_experiment("spin-born");
  EXPECT_THROW(resolve(*e, nullptr, {{"trials", "10"}}), UsageError);
  EXPECT_THROW(resolve(*e, nullptr, {{"seed", "1"}, {"trials", "10"}, {"bogus", "1"}}), UsageError);
  EXPECT_THROW(resolve(*e, nullptr, {{"seed", "x"}, {"trials", "10"}}), UsageError);
  EXPECT_THROW(resolve(*e, nullptr, {{"seed", "1"}, {"trials", "10"}, {"format", "xml"}}), UsageError);
  EXPECT_NO_THROW(resolve(*find_experiment("curvature"), nullptr, {}));
  EXPECT_EQ(find_experiment("nope"), nullptr);
}

TEST(Validate, ReportsEveryProblemWithLines) {
  std::vector<Diagnostic> d;
  const auto cf = parse("seed = 1\ncolour = red\n[spin-born]\nz0 = high\n[nope]\n[born-bridge]\nsigma = 2\n", d);
  const auto v = validate(cf);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v[0].line, 2);
  EXPECT_EQ(v[1].line, 3);
  EXPECT_NE(v[1].message.find("'trials' is required for spin-born"), std::string::npos);
  EXPECT_EQ(v[2].line, 4);
  EXPECT_EQ(v[3].line, 5);
  EXPECT_NE(v[3].message.find("unknown experiment"), std::string::npos);
  EXPECT_EQ(v[4].line, 6);
}

TEST(Validate, ShippedConfigsAreClean) {
  for (const auto& entry : fs::directory_iterator(HB_CONFIG_DIR)) {
    std::vector<Diagnostic> d;
    const auto cf = parse_config_file(entry.path().string(), d);
    EXPECT_TRUE(d.empty()) << entry.path();
    EXPECT_TRUE(validate(cf).empty()) << entry.path();
  }
}

TEST(Registry, FourteenExperimentsWithSchemas) {
  EXPECT_EQ(experiments().size(), 14u);
  for (const auto& e : experiments()) {
    const auto sch = schema(e);
    std::set<std::string> names;
    for (const auto& p : sch) {
      EXPECT_TRUE(names.insert(p.name).second) << e.name << " repeats " << p.name;
      if (!p.required) {
        EXPECT_FALSE(check_value(p, p.fallback)) << e.name << "." << p.name;
      }
    }
    EXPECT_EQ(names.count("seed") == 1, e.stochastic) << e.name;
  }
}

TEST(Summary, RowsAndPassLogic) {
  RunSummary s;
  s.experiment = "x";
  EXPECT_TRUE(s.check_abs("a", 1.05, 1.0, 0.1, Source::Exact).pass);
  EXPECT_FALSE(s.check_rel("b", 1.2, 1.0, 0.1, Source::Oracle, Role::Diagnostic).pass);
  EXPECT_TRUE(s.all_pass());
  EXPECT_TRUE(s.check_max("c", 1e-12, 1e-10, Source::Exact).pass);
  EXPECT_FALSE(s.check_min("d", std::nan(""), 0.0, Source::Published).pass);
  EXPECT_FALSE(s.all_pass());
}

TEST(Summary, SerialisationFormats) {
  Table t;
  t.columns = {"i", "value", "label"};
  t.rows.push_back({Cell(3LL), Cell(0.1), Cell(std::string("a,\"b\""))});
  t.rows.push_back({Cell(-1LL), Cell(std::numeric_limits<double>::infinity()), Cell(std::string("c"))});
  EXPECT_EQ(trials_csv(t), "i,value,label\n3,0.10000000000000001,\"a,\"\"b\"\"\"\n-1,inf,c\n");
  const auto j = nlohmann::json::parse(trials_json(t));
  EXPECT_EQ(j[0]["i"], 3);
  EXPECT_EQ(j[0]["value"], 0.1);
  EXPECT_EQ(j[1]["value"], "inf");

  RunSummary s;
  s.experiment = "demo";
  s.parameters = {{"seed", "1"}};
  s.check_abs("row", 2.0, 2.0, 0.0, Source::Published);
  const auto sj = nlohmann::json::parse(summary_json(s));
  EXPECT_EQ(sj["experiment"], "demo");
  EXPECT_EQ(sj["rows"][0]["reference_source"], "published");
  EXPECT_EQ(sj["rows"][0]["role"], "criterion");
  EXPECT_EQ(sj["pass"], true);

  const auto dir = scratch("summary");
  const auto w = write_outputs(s, dir.string(), Format::Json);
  EXPECT_EQ(w.trials.filename(), "demo-trials.json");
  EXPECT_EQ(slurp(w.summary), summary_json(s));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(cli("list"), 0);
  EXPECT_EQ(cli("run curvature --output-dir " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "curvature-trials.csv"));
  EXPECT_TRUE(fs::exists(dir / "curvature-summary.json"));
  EXPECT_EQ(cli("estimates --output_dir=" + dir.string()), 1);
  EXPECT_EQ(cli("run no-such-experiment"), 2);
  EXPECT_EQ(cli("run spin-born --trials 100"), 2);
  EXPECT_EQ(cli("run curvature --hbar"), 2);
  EXPECT_EQ(cli("run curvature --hbar -1 --output_dir " + dir.string()), 2);
  EXPECT_EQ(cli("validate /nonexistent.conf"), 2);
  std::ofstream(dir / "bad.conf") << "[spin-born]\nz0 = up\n";
  EXPECT_EQ(cli("validate " + (dir / "bad.conf").string()), 2);
}

TEST(Cli, ConfigAndFlagsProduceIdenticalFiles) {
  const auto a = scratch("cfg_a"), b = scratch("cfg_b");
  std::ofstream(a / "run.conf") << "[born-bridge]\nseed = 4\ntrials = 4\nformat = json\noutput_dir = " << a.string() << "\n";
  ASSERT_EQ(cli("run born-bridge --config " + (a / "run.conf").string()), 0);
  ASSERT_EQ(cli("born-bridge --seed 4 --trials 4 --format json --output-dir " + b.string()), 0);
  EXPECT_EQ(slurp(a / "born-bridge-trials.json"), slurp(b / "born-bridge-trials.json"));
  EXPECT_EQ(slurp(a / "born-bridge-summary.json"), slurp(b / "born-bridge-summary.json"));
}

}  // namespace
