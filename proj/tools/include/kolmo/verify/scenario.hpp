#pragma once

#include "kolmo/chain_model.hpp"
#include "kolmo/verify/ensemble.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kolmo::verify {

inline constexpr const char* kScenarioFormat = "kolmo-scenario/1";

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecayProbeConfig {
  int j = 1;
  double alpha = 0.0;
  std::vector<int> beta;
};

struct Tolerances {
  double exponent = 0.07;
  double drift = 0.15;
  double residual = 0.05;
  double identity = 1e-12;
  double mc_volume = 0.01;
  double fs_drift = 0.2;
  double interpolation = 1e-3;
  double duality = 1e-6;
};

/// Everything a verification run depends on. Parsed from a flat `key = value` file; see
/// scenarios/*.scenario for the documented keys.
struct Scenario {
  std::string name = "unnamed";
  ChainParams params;
  std::string profile = "constant";
  double profile_a = 0.5;       // constant: a = profile_a I
  double profile_kappa = 1.0;   // smooth_periodic
  std::vector<double> profile_breaks;
  std::vector<double> profile_values;
  std::uint64_t seed = 1;
  std::vector<std::string> suites = {"kernel", "transport", "maxreg", "geometry"};
  bool refine = true;
  double refine_factor = 0.0;  // 0: double the points of block 1
  bool fields = false;         // write fields/*.bin snapshots

  std::vector<double> half_lengths;
  std::vector<int> points;
  int members = 20;
  double cutoff = 0.25;
  double window = 1.0;
  double dt = 0.02;
  int lead_steps = 10;
  int knot_spacing = 3;
  int knots = 4;

  int fit_samples = 10000;
  int probe_points = 64;
  double probe_t_min = 0.01;
  double probe_t_max = 1.0;
  std::vector<DecayProbeConfig> probes;

  std::vector<double> transport_alphas = {0.5, 1.0, 2.0};
  double transport_lambda = 1.0;

  double maxreg_lambda = 0.0;
  double monotonicity_lambda = 1.0;
  bool negative_control = false;
  double negative_factor = 2.0;
  double residual_dt = 0.04;
  double scaling_radius = 2.0;

  long triples = 100000;
  long pairs = 100000;
  int boundary_samples = 10;
  long sandwich_samples = 100000;
  long mc_samples = 1000000;
  int fs_members = 20;
  int fs_points = 16;
  int fs_steps = 12;
  double fs_p = 4.0;
  bool fs_refine = true;  // refinement study of the Fefferman-Stein ratio

  Tolerances tol;

  DiffusionProfile diffusion() const;
  EnsembleSpec ensemble() const;
  /// Effective refinement factor.
  double refinement() const;
  /// Canonical key/value form; parsing it gives back the same scenario.
  std::map<std::string, std::string> to_map() const;
  std::string to_text() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Default probe list: four or more (j, alpha, beta) tuples for the given shape.
std::vector<DecayProbeConfig> default_probes(const ChainParams& params);

}  // namespace kolmo::verify
