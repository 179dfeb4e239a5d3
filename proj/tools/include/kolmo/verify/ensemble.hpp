#pragma once

#include "kolmo/chain_model.hpp"
#include "kolmo/grid_field.hpp"

#include <cstdint>
#include <vector>

namespace kolmo::verify {

/// Random space-time forcing: band-limited spatial fields under a fixed Gaussian window, attached
/// to time knots and blended with cubic B-splines. Cutoffs are fractions of each block's sampling
/// rate and knots sit a fixed number of steps apart, so refining the grid moves the content to
/// finer scales in the anisotropic way the dilation does.
struct EnsembleSpec {
  ChainParams params;
  std::vector<double> half_lengths;
  std::vector<int> points;
  std::vector<double> cutoffs;  // |k| / N <= cutoff, per block
  std::vector<double> windows;  // Gaussian widths, per block
  double dt = 0.05;
  int lead_steps = 0;    // zero slices before the forcing starts
  int knot_spacing = 4;  // steps between knots
  int knots = 4;
  std::uint64_t seed = 1;

  Grid grid() const;
  /// Number of time slices: lead, knot support and one trailing zero slice.
  int steps() const;
  double t0() const { return -lead_steps * dt; }
  /// Time at which the forcing vanishes again.
  double support_end() const { return (knots + 3) * knot_spacing * dt; }
};

/// Member `index` of the ensemble. With `mean_zero` a multiple of the envelope is subtracted so
/// the space-time integral vanishes.
SpaceTimeField ensemble_member(const EnsembleSpec& spec, int index, bool mean_zero = false);

/// Grid refinement by factor r: N_j scaled by r^{2(n-j)+1} (rounded to even), windows by the
/// inverse point ratio, dt by r^{-2}. Step counts stay fixed, so time windows shrink with dt.
EnsembleSpec refine(const EnsembleSpec& spec, double r);

/// Member `index` of the refined ensemble read back at the coarse scale: the fine sample arrays
/// are cropped to the central coarse block. Both levels then see one forcing, the fine level as
/// its discrete dilate, so refinement drift carries no sampling noise.
SpaceTimeField coarse_member(const EnsembleSpec& coarse, const EnsembleSpec& fine, int index,
                             bool mean_zero = false);

/// Factor for which one refinement doubles the points of block 1.
double default_refinement_factor(const ChainParams& params);

/// Relative change |b - a| / |a|.
double relative_drift(double a, double b);

}  // namespace kolmo::verify
