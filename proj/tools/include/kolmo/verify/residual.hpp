#pragma once

#include "kolmo/verify/report.hpp"
#include "kolmo/verify/scenario.hpp"

#include <string>
#include <vector>

namespace kolmo::verify {

/// Discrete residual of the resolvent (or transport) equation for one forcing with fixed physical
/// content, at time step residual_dt and residual_dt / 2.
struct ResidualStudy {
  std::vector<double> dts;
  std::vector<double> residuals;

  /// pass when the finest residual is at most `tol` and the residual decreases with dt.
  CheckRecord record(const std::string& name, const std::string& anchor, double tol) const;
};

ResidualStudy residual_study(const Scenario& sc, double lambda, bool diffusion);

}  // namespace kolmo::verify
