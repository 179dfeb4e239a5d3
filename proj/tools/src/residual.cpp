#include "kolmo/verify/residual.hpp"

#include "kolmo/evolution_ops.hpp"
#include "kolmo/verify/ensemble.hpp"

#include <cmath>

namespace kolmo::verify {

CheckRecord ResidualStudy::record(const std::string& name, const std::string& anchor,
                                  double tol) const {
  CheckRecord r = check(name, anchor);
  bool decreasing = true;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    r.value("dt_" + std::to_string(i), dts[i]).value("residual_" + std::to_string(i), residuals[i]);
    if (i > 0 && !(residuals[i] < residuals[i - 1])) decreasing = false;
  }
  r.predicted = 0.0;
  r.tolerance = tol;
  r.status = !residuals.empty() && std::isfinite(residuals.back()) && residuals.back() <= tol &&
                     decreasing
                 ? Status::pass
                 : Status::fail;
  r.note = "relative residual at the finest step, required to decrease as dt halves";
  return r;
}

ResidualStudy residual_study(const Scenario& sc, double lambda, bool diffusion) {
  // Knots 0.4 time units apart whatever the step, so halving dt keeps the forcing.
  const int spacing = std::max(1, static_cast<int>(std::lround(0.4 / sc.residual_dt)));
  const DiffusionProfile prof = sc.diffusion();
  ResidualStudy study;
  for (int level = 0; level < 2; ++level) {
    EnsembleSpec spec = sc.ensemble();
    const int mult = 1 << level;
    spec.dt = sc.residual_dt / mult;
    spec.knot_spacing = spacing * mult;
    spec.lead_steps = spacing * mult;
    const SpaceTimeField f = ensemble_member(spec, 0);
    double res = 0.0;
    if (diffusion) {
      const SpaceTimeField u = resolvent_all({sc.params, prof, lambda}, f, f.t0());
      res = resolvent_residual(sc.params, prof, lambda, u, f, true);
    } else {
      const SpaceTimeField u = transport_all(sc.params, lambda, f, f.t0());
      res = resolvent_residual(sc.params, prof, lambda, u, f, false);
    }
    study.dts.push_back(spec.dt);
    study.residuals.push_back(res);
  }
  return study;
}

}  // namespace kolmo::verify
