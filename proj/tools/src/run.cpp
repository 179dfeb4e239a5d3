#include "kolmo/verify/run.hpp"

#include "kolmo/grid_field.hpp"
#include "kolmo/parallel.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace kolmo::verify {

std::vector<std::string> select_suites(const std::string& filter, const Scenario& sc) {
  if (filter == "all") return sc.suites;
  for (const auto& s : suite_names())
    if (s == filter) return {filter};
  throw std::invalid_argument("unknown suite '" + filter + "'");
}

VerificationReport run_scenario(const Scenario& sc, const std::vector<std::string>& suites,
                                const std::filesystem::path& out) {
  std::vector<SuiteResult> results(suites.size());
  parallel_for(suites.size(), [&](std::size_t i) { results[i] = run_suite(suites[i], sc); });

  VerificationReport report;
  report.scenario_name = sc.name;
  report.scenario = sc.to_map();
  for (auto& r : results) report.add(r.records);
  report.sort();

  if (!out.empty()) {
    std::filesystem::create_directories(out / "tables");
    write_records_csv(out / "tables" / "records.csv", report.records);
    for (const auto& r : results) {
      for (const auto& t : r.tables) {
        const auto path = out / "tables" / (t.name + ".csv");
        if (t.writer) {
          t.writer(path);
        } else {
          std::ofstream f(path);
          if (!f) throw std::runtime_error("cannot write " + path.string());
          f << t.csv;
        }
      }
      if (!r.fields.empty()) std::filesystem::create_directories(out / "fields");
      for (const auto& s : r.fields) write_binary(s.field, out / "fields" / (s.name + ".bin"));
    }
  }
  return report;
}

int run(const RunOptions& opt, std::ostream& log, std::ostream& err) {
  Scenario sc;
  try {
    sc = load_scenario(opt.scenario);
  } catch (const std::exception& e) {
    err << "verify: malformed scenario: " << e.what() << "\n";
    return kExitBadScenario;
  }
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.refine) sc.refine = true;

  std::vector<std::string> suites;
  try {
    suites = select_suites(opt.suite, sc);
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << " (expected kernel, transport, maxreg, geometry or all)\n";
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  try {
    report = run_scenario(sc, suites, opt.out);
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << "\n";
    return kExitBadScenario;
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::time_t now = std::time(nullptr);
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  report.timestamp = ts.str();

  try {
    write_json(opt.out / "report.json", report.full());
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << "\n";
    return kExitBadScenario;
  }

  for (const auto& r : report.records)
    log << "[" << to_string(r.status) << "] " << r.name << (r.note.rfind("error:", 0) == 0 ? "  " + r.note : "") << "\n";
  log << report.count(Status::pass) << " pass, " << report.count(Status::fail) << " fail, "
      << report.count(Status::recorded) << " recorded (" << std::fixed << std::setprecision(1)
      << report.wall_time << " s)\n";
  return report.any_failed() ? kExitFailedChecks : kExitOk;
}

}  // namespace kolmo::verify
