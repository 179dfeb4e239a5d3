#include "kolmo/verify/suites.hpp"

#include <cmath>
#include <stdexcept>

namespace kolmo::verify {

double block_power_norm(const SpaceTimeField& u, int j, double gamma) {
  double s = 0.0;
  for (const auto& slice : u.slices()) {
    const double v = lp_norm(block_power(slice, j, gamma), 2.0);
    s += v * v;
  }
  return std::sqrt(s * u.dt());
}

Status within(double measured, double predicted, double tol) {
  return std::isfinite(measured) && std::abs(measured - predicted) <= tol ? Status::pass
                                                                         : Status::fail;
}

Status at_most(double measured, double bound) {
  return std::isfinite(measured) && measured <= bound ? Status::pass : Status::fail;
}

MemberSource fresh_source(const EnsembleSpec& spec) {
  return [spec](int m) { return ensemble_member(spec, m); };
}

MemberSource coarse_source(const EnsembleSpec& coarse, const EnsembleSpec& fine) {
  return [coarse, fine](int m) { return coarse_member(coarse, fine, m); };
}

CheckRecord error_record(const std::string& name, const std::string& anchor,
                         const std::exception& e) {
  CheckRecord r;
  r.name = name;
  r.anchor = anchor;
  r.status = Status::fail;
  r.note = std::string("error: ") + e.what();
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"kernel", "transport", "maxreg", "geometry"};
  return names;
}

SuiteResult run_suite(const std::string& name, const Scenario& sc) {
  if (name == "kernel") return suite_kernel(sc);
  if (name == "transport") return suite_transport(sc);
  if (name == "maxreg") return suite_maxreg(sc);
  if (name == "geometry") return suite_geometry(sc);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace kolmo::verify
