#include "kolmo/verify/ensemble.hpp"
#include "kolmo/verify/run.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace kolmo;
using namespace kolmo::verify;

namespace {

const char* kSmall = R"(format = kolmo-scenario/1
name = small
n = 2
d = 1
kappa = 2
profile = constant
profile.a = 0.5
seed = 77
grid.half_length = 4
grid.points = 16
ensemble.members = 3
ensemble.dt = 0.04
ensemble.lead_steps = 4
kernel.fit_samples = 400
kernel.probe_points = 24
maxreg.negative_control = true
geometry.triples = 2000
geometry.pairs = 200
geometry.boundary_samples = 20
geometry.sandwich_samples = 2000
geometry.mc_samples = 20000
geometry.fs_members = 3
geometry.fs_points = 8
geometry.fs_steps = 8
)";

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kolmo_verify_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

const CheckRecord* find(const VerificationReport& r, const std::string& name) {
  for (const auto& rec : r.records)
    if (rec.name == name) return &rec;
  return nullptr;
}

// one full run of the small scenario, shared by the report tests
const VerificationReport& small_report() {
  static const VerificationReport rep = [] {
    const Scenario sc = parse_scenario(kSmall);
    return run_scenario(sc, sc.suites);
  }();
  return rep;
}

}  // namespace

TEST(Scenario, ParsesAndRoundTrips) {
  const Scenario sc = parse_scenario(kSmall);
  EXPECT_EQ(sc.name, "small");
  EXPECT_EQ(sc.params.n, 2);
  EXPECT_EQ(sc.points, (std::vector<int>{16, 16}));
  EXPECT_EQ(sc.members, 3);
  EXPECT_TRUE(sc.negative_control);
  EXPECT_GE(sc.probes.size(), 4u);
  const Scenario again = parse_scenario(sc.to_text());
  EXPECT_EQ(again.to_map(), sc.to_map());
}

TEST(Scenario, RejectsBadInput) {
  const std::string ok = kSmall;
  EXPECT_THROW(parse_scenario(ok + "grid.pionts = 16\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(ok + "ensemble.cutoff = lots\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(ok + "seed = 5\n"), ScenarioError);  // duplicate
  EXPECT_THROW(parse_scenario(ok + "ensemble.cutoff = 0.7\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(ok + "suites = kernel, fluids\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("name = x\nn = 2\n"), ScenarioError);  // no format line
  EXPECT_THROW(parse_scenario(ok + "this line has no equals sign\n"), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/kolmo.scenario"), ScenarioError);
}

TEST(Run, ExitCodes) {
  const auto dir = temp_dir("exit");
  const auto good = write_file(dir / "good.scenario", kSmall);
  const auto bad = write_file(dir / "bad.scenario", std::string(kSmall) + "bogus.key = 1\n");
  std::ostringstream log, err;

  RunOptions opt;
  opt.scenario = good;
  opt.out = dir / "out";
  opt.suite = "fluids";
  EXPECT_EQ(run(opt, log, err), kExitUsage);
  EXPECT_NE(err.str().find("unknown suite"), std::string::npos);

  opt.scenario = bad;
  opt.suite = "kernel";
  EXPECT_EQ(run(opt, log, err), kExitBadScenario);
  opt.scenario = dir / "missing.scenario";
  EXPECT_EQ(run(opt, log, err), kExitBadScenario);

  opt.scenario = good;
  EXPECT_EQ(run(opt, log, err), kExitOk) << log.str() << err.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "tables" / "records.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "tables" / "kernel_decay.csv"));
}

TEST(Run, UnderstatedKappaFailsEllipticity) {
  std::string text = kSmall;
  text.replace(text.find("kappa = 2"), 9, "kappa = 1.5");
  text.replace(text.find("profile.a = 0.5"), 15, "profile.a = 0.1");
  const Scenario sc = parse_scenario(text);
  const VerificationReport rep = run_scenario(sc, {"kernel"});
  const CheckRecord* r = find(rep, "kernel.ellipticity");
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->status, Status::fail);
  EXPECT_TRUE(rep.any_failed());
  EXPECT_EQ(rep.payload()["records"][0]["name"], "kernel.c0");
}

TEST(Report, EveryAnchorResolves) {
  const auto& rep = small_report();
  ASSERT_FALSE(rep.records.empty());
  const auto& anchors = anchor_map();
  std::set<std::string> used;
  for (const auto& r : rep.records) {
    EXPECT_TRUE(anchors.count(r.anchor)) << r.name << " -> " << r.anchor;
    used.insert(r.anchor);
  }
  // every suite contributes
  for (const char* prefix : {"kernel.", "transport.", "maxreg.", "geometry."}) {
    bool any = false;
    for (const auto& r : rep.records) any = any || r.name.rfind(prefix, 0) == 0;
    EXPECT_TRUE(any) << prefix;
  }
}

TEST(Report, SchemaAndSummary) {
  const auto& rep = small_report();
  const nlohmann::json j = rep.payload();
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["scenario_name"], "small");
  EXPECT_EQ(j["scenario"]["format"], kScenarioFormat);
  EXPECT_FALSE(j.contains("run"));
  std::size_t total = 0;
  for (const char* k : {"pass", "fail", "recorded"}) total += j["summary"][k].get<std::size_t>();
  EXPECT_EQ(total, j["records"].size());
  std::string prev;
  for (const auto& r : j["records"]) {
    for (const char* k : {"name", "anchor", "reference", "measured", "predicted", "tolerance", "status"})
      EXPECT_TRUE(r.contains(k)) << k;
    const std::string name = r["name"];
    EXPECT_LT(prev, name);
    prev = name;
    const std::string st = r["status"];
    EXPECT_TRUE(st == "pass" || st == "fail" || st == "recorded");
  }
  const nlohmann::json full = rep.full();
  EXPECT_TRUE(full["run"].contains("timestamp"));
  EXPECT_TRUE(full["run"].contains("wall_time_seconds"));
}

TEST(Report, SmallScenarioHasNoFailures) {
  for (const auto& r : small_report().records)
    EXPECT_NE(r.status, Status::fail) << r.name << " " << r.note;
}

TEST(Report, DeterministicPayload) {
  const Scenario sc = parse_scenario(kSmall);
  const auto a = run_scenario(sc, {"kernel", "maxreg"}).payload().dump();
  const auto b = run_scenario(sc, {"kernel", "maxreg"}).payload().dump();
  EXPECT_EQ(a, b);
}

TEST(Report, NonFiniteNumbersBecomeStrings) {
  VerificationReport rep;
  CheckRecord r = check("x", "model.ellipticity");
  r.value("a", std::numeric_limits<double>::quiet_NaN()).value("b", -std::numeric_limits<double>::infinity());
  rep.add({r});
  const auto j = rep.payload();
  EXPECT_EQ(j["records"][0]["measured"]["a"], "nan");
  EXPECT_EQ(j["records"][0]["measured"]["b"], "-inf");
  EXPECT_TRUE(j["records"][0]["predicted"].is_null());
}

TEST(Ensemble, RefineScalesGridWindowsAndStep) {
  const Scenario sc = parse_scenario(kSmall);
  const EnsembleSpec base = sc.ensemble();
  const EnsembleSpec fine = refine(base, std::cbrt(2.0));
  EXPECT_EQ(fine.points[0], 32);
  EXPECT_EQ(fine.points[1], 20);
  EXPECT_NEAR(fine.windows[0], base.windows[0] / 2.0, 1e-15);
  EXPECT_NEAR(fine.windows[1], base.windows[1] * 16.0 / 20.0, 1e-15);
  EXPECT_NEAR(fine.dt, base.dt / std::cbrt(4.0), 1e-15);
  EXPECT_EQ(fine.steps(), base.steps());
  EXPECT_THROW(refine(base, 0.0), std::invalid_argument);
}

TEST(Ensemble, CoarseMemberIsCentralCrop) {
  const Scenario sc = parse_scenario(kSmall);
  const EnsembleSpec base = sc.ensemble();
  const EnsembleSpec fine = refine(base, std::cbrt(2.0));
  const SpaceTimeField f = ensemble_member(fine, 1);
  const SpaceTimeField c = coarse_member(base, fine, 1);
  ASSERT_EQ(c.steps(), f.steps());
  EXPECT_EQ(c.dt(), base.dt);
  const Grid g = base.grid();
  std::vector<int> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    const std::vector<int> fi{idx[0] + 8, idx[1] + 2};
    for (std::size_t k = 0; k < c.steps(); ++k) ASSERT_EQ(c[k][i], f[k][f.grid().flatten(fi)]);
  }
  EXPECT_THROW(coarse_member(fine, base, 0), std::invalid_argument);
}

TEST(Ensemble, MeanZeroMembers) {
  const Scenario sc = parse_scenario(kSmall);
  const SpaceTimeField f = ensemble_member(sc.ensemble(), 2, true);
  double total = 0.0, scale = 0.0;
  for (const auto& s : f.slices())
    for (const auto& v : s.values()) total += v.real(), scale += std::abs(v.real());
  EXPECT_LT(std::abs(total), 1e-12 * scale);
  EXPECT_EQ(relative_drift(2.0, 2.5), 0.25);
}
