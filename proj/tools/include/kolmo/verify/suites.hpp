#pragma once

#include "kolmo/grid_field.hpp"
#include "kolmo/verify/report.hpp"
#include "kolmo/verify/scenario.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace kolmo::verify {

struct Table {
  std::string name;  // written as tables/<name>.csv
  std::string csv;
  std::function<void(const std::filesystem::path&)> writer;  // used instead of csv when set
};

struct Snapshot {
  std::string name;  // written as fields/<name>.bin
  GridField field;
};

struct SuiteResult {
  std::vector<CheckRecord> records;
  std::vector<Table> tables;
  std::vector<Snapshot> fields;
};

SuiteResult suite_kernel(const Scenario& sc);
SuiteResult suite_transport(const Scenario& sc);
SuiteResult suite_maxreg(const Scenario& sc);
SuiteResult suite_geometry(const Scenario& sc);

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, const Scenario& sc);

/// sqrt(dt sum_k || (-Delta_{x_j})^gamma u_k ||_2^2).
double block_power_norm(const SpaceTimeField& u, int j, double gamma);

/// Status helpers.
Status within(double measured, double predicted, double tol);
Status at_most(double measured, double bound);

/// Record for a sub-operation that threw.
CheckRecord error_record(const std::string& name, const std::string& anchor, const std::exception& e);

/// Forcing ensemble member by index.
using MemberSource = std::function<SpaceTimeField(int)>;
MemberSource fresh_source(const EnsembleSpec& spec);
/// Members of `fine` cropped back to the `coarse` grid.
MemberSource coarse_source(const EnsembleSpec& coarse, const EnsembleSpec& fine);

struct ScalingCheck {
  double lhs = 0.0;  // average over Q_r(t0, x0) of |P u - c|^2
  double rhs = 0.0;  // average over Q_1(0) of |P u~ - c|^2
  double relative_difference = 0.0;
  double max_pointwise = 0.0;  // max |P u(map z) - P u~(z)| / max |P u~|
  int samples = 0;
};

/// Solves the resolvent for a random forcing on a box and for the pulled-back forcing on the box
/// scaled by the dilation, then compares the two ball averages of the block-j fractional
/// derivative at the same sample points. With printed_map the forcing is pulled back along
/// e^{s A} x0 instead of e^{r^2 s A} x0.
ScalingCheck scaling_identity_check(const Scenario& sc, int j, double r, int samples,
                                    bool printed_map = false);

}  // namespace kolmo::verify
