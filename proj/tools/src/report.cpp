#include "kolmo/verify/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace kolmo::verify {

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::recorded: return "recorded";
  }
  return "recorded";
}

const std::map<std::string, std::string>& anchor_map() {
  static const std::map<std::string, std::string> m = {
      {"model.ellipticity",
       "uniform ellipticity kappa^{-1} <= a_t <= kappa of the diffusion coefficient"},
      {"kernel.moment-form",
       "positivity of c0, the infimum of the polynomial moment form on the unit sphere"},
      {"kernel.covariance-lower-bound",
       "normalized covariance bounded below by 2 c0 / kappa"},
      {"kernel.gaussian-bound",
       "Gaussian upper bound |grad^beta p| <= C (t-s)^{-e/2} exp(-c |Theta z|^2) for the density"},
      {"kernel.decay-exponent",
       "time decay of || Delta^{alpha/2}_{x_j} grad^beta T_{s,t} ||_{inf->inf} with exponent "
       "-(sum_i (2(n-i)+1) beta_i + (2(n-j)+1) alpha) / 2"},
      {"evolution.duality", "<g, T f> = <T* g, f> for the semigroup and its transpose"},
      {"transport.interpolation",
       "|| Delta^{alpha/(2(1+alpha))}_{x_j} u || <= C || Delta^{alpha/2}_{x_{j+1}} u ||^{1/(1+alpha)} "
       "|| f ||^{alpha/(1+alpha)} for the transport equation"},
      {"transport.propagation-printed",
       "propagation to block j from the last block with exponents (1+(n-j-1)alpha)/(1+(n-j)alpha) "
       "and alpha/(1+(n-j)alpha), as printed"},
      {"transport.propagation-chained",
       "propagation to block j from the last block with exponents 1/(1+(n-j)alpha) and "
       "(n-j)alpha/(1+(n-j)alpha), obtained by chaining the one-step interpolation"},
      {"transport.equation",
       "d_s u + A x . grad u - lambda u + f = 0 solved along characteristics"},
      {"maxreg.estimate",
       "|| Delta^{1/(1+2(n-j))}_{x_j} u ||_p <= C || f ||_p for the resolvent, at p = 2"},
      {"maxreg.equation", "d_s u + (L_s - lambda) u + f = 0 for the resolvent"},
      {"maxreg.damping", "larger lambda does not increase the ratios (empirical)"},
      {"maxreg.scaling", "ball averages of the resolvent are invariant under the dilation pull-back"},
      {"maxreg.negative-control",
       "mis-scaled fractional order 1/(2(n-j)) must grow under refinement"},
      {"geometry.gauge-scaling", "ell(r^2 t, Theta_r x) = r ell(t, x)"},
      {"geometry.subadditivity", "ell(t + s, x + y) <= ell(t, x) + ell(s, y)"},
      {"geometry.quasi-triangle",
       "ell_from(q, p) <= 3 ell_from(p, q) <= 12 (ell_from(p, z) + ell_from(z, q))"},
      {"geometry.engulfing", "intersecting balls of radius r: Q_r(p) lies in Q_{20 r}(q)"},
      {"geometry.sandwich",
       "symmetrized balls: Qsym_r within Q_r within Qsym_{4r}"},
      {"geometry.volume", "|Q_r| proportional to r^{n^2 d + 2}"},
      {"geometry.maximal", "elementary identities of the maximal and sharp functions"},
      {"geometry.fefferman-stein", "|| f ||_p <= C || f^# ||_p for mean-zero f (empirical C)"},
  };
  return m;
}

void VerificationReport::add(std::vector<CheckRecord> more) {
  for (auto& r : more) records.push_back(std::move(r));
}

void VerificationReport::sort() {
  std::stable_sort(records.begin(), records.end(),
                   [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
}

bool VerificationReport::any_failed() const { return count(Status::fail) > 0; }

std::size_t VerificationReport::count(Status s) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [s](const CheckRecord& r) { return r.status == s; }));
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json VerificationReport::payload() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario_name"] = scenario_name;
  j["scenario"] = scenario;
  nlohmann::json recs = nlohmann::json::array();
  const auto& anchors = anchor_map();
  for (const auto& r : records) {
    nlohmann::json o;
    o["name"] = r.name;
    o["anchor"] = r.anchor;
    auto it = anchors.find(r.anchor);
    o["reference"] = it == anchors.end() ? "" : it->second;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : r.measured) m[k] = number(v);
    o["measured"] = m;
    o["predicted"] = r.predicted ? number(*r.predicted) : nlohmann::json();
    o["tolerance"] = r.tolerance ? number(*r.tolerance) : nlohmann::json();
    o["status"] = to_string(r.status);
    if (!r.note.empty()) o["note"] = r.note;
    recs.push_back(o);
  }
  j["records"] = recs;
  j["summary"] = {{"pass", count(Status::pass)},
                  {"fail", count(Status::fail)},
                  {"recorded", count(Status::recorded)}};
  return j;
}

nlohmann::json VerificationReport::full() const {
  nlohmann::json j = payload();
  j["run"] = {{"timestamp", timestamp},
              {"wall_time_seconds", wall_time},
              {"hardware_threads", std::thread::hardware_concurrency()},
              {"compiler", __VERSION__}};
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_records_csv(const std::filesystem::path& path, const std::vector<CheckRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "name,status,anchor,predicted,tolerance,measured\n";
  for (const auto& r : records) {
    out << r.name << ',' << to_string(r.status) << ',' << r.anchor << ',';
    if (r.predicted) out << *r.predicted;
    out << ',';
    if (r.tolerance) out << *r.tolerance;
    out << ',';
    for (std::size_t i = 0; i < r.measured.size(); ++i) {
      if (i) out << ';';
      out << r.measured[i].first << '=' << r.measured[i].second;
    }
    out << '\n';
  }
}

}  // namespace kolmo::verify
