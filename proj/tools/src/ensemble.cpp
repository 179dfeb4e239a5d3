#include "kolmo/verify/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kolmo::verify {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double cubic_bspline(double u) {
  const double a = std::abs(u);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

int round_even(double v) {
  const int k = static_cast<int>(std::lround(v / 2.0)) * 2;
  return std::max(k, 8);
}

}  // namespace

Grid EnsembleSpec::grid() const { return Grid(params, half_lengths, points); }

int EnsembleSpec::steps() const { return lead_steps + (knots + 3) * knot_spacing + 1; }

SpaceTimeField ensemble_member(const EnsembleSpec& spec, int index, bool mean_zero) {
  if (spec.knots < 1 || spec.knot_spacing < 1 || spec.lead_steps < 0 || !(spec.dt > 0.0))
    throw std::invalid_argument("ensemble: bad time layout");
  const Grid g = spec.grid();
  std::vector<GridField> knots;
  knots.reserve(spec.knots);
  for (int m = 0; m < spec.knots; ++m) {
    const std::uint64_t s = mix(mix(spec.seed, static_cast<std::uint64_t>(index)),
                                static_cast<std::uint64_t>(m));
    knots.push_back(gaussian_window(random_bandlimited(g, s, spec.cutoffs), spec.windows));
  }
  const int steps = spec.steps();
  std::vector<GridField> slices(static_cast<std::size_t>(steps), GridField(g));
  for (int k = spec.lead_steps; k < steps; ++k) {
    // Knot m sits at (m + 2) * spacing steps after the forcing starts.
    const double u = static_cast<double>(k - spec.lead_steps) / spec.knot_spacing;
    for (int m = 0; m < spec.knots; ++m) {
      const double w = cubic_bspline(u - (m + 2));
      if (w != 0.0) slices[static_cast<std::size_t>(k)].axpy(w, knots[static_cast<std::size_t>(m)]);
    }
  }
  if (mean_zero) {
    // Subtract a multiple of the envelope (window times knot weights) so the total integral
    // vanishes while the support stays the same.
    const GridField window = gaussian_window(GridField::constant(g, 1.0), spec.windows);
    double fsum = 0.0;
    double esum = 0.0;
    std::vector<double> env(static_cast<std::size_t>(steps), 0.0);
    double wsum = 0.0;
    for (const auto& z : window.values()) wsum += z.real();
    for (int k = spec.lead_steps; k < steps; ++k) {
      const double u = static_cast<double>(k - spec.lead_steps) / spec.knot_spacing;
      for (int m = 0; m < spec.knots; ++m) env[static_cast<std::size_t>(k)] += cubic_bspline(u - (m + 2));
      for (const auto& z : slices[static_cast<std::size_t>(k)].values()) fsum += z.real();
      esum += env[static_cast<std::size_t>(k)] * wsum;
    }
    const double c = fsum / esum;
    for (int k = spec.lead_steps; k < steps; ++k)
      slices[static_cast<std::size_t>(k)].axpy(-c * env[static_cast<std::size_t>(k)], window);
  }
  SpaceTimeField f(spec.t0(), spec.dt, std::move(slices));
  return f;
}

EnsembleSpec refine(const EnsembleSpec& spec, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("refine: factor must be positive");
  EnsembleSpec out = spec;
  for (int j = 1; j <= spec.params.n; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    out.points[i] = round_even(spec.points[i] * std::pow(r, spec.params.block_degree(j)));
    // windows follow the rounded point ratio, so both grids resolve the window alike
    out.windows[i] = spec.windows[i] * spec.points[i] / out.points[i];
  }
  out.dt = spec.dt / (r * r);
  return out;
}

SpaceTimeField coarse_member(const EnsembleSpec& coarse, const EnsembleSpec& fine, int index,
                             bool mean_zero) {
  const int n = coarse.params.n;
  for (int j = 0; j < n; ++j)
    if (fine.points[j] < coarse.points[j] || (fine.points[j] - coarse.points[j]) % 2 != 0)
      throw std::invalid_argument("coarse_member: fine grid must extend the coarse one evenly");
  if (fine.steps() != coarse.steps())
    throw std::invalid_argument("coarse_member: step counts differ");
  const SpaceTimeField f = ensemble_member(fine, index, mean_zero);
  const Grid g = coarse.grid();
  const Grid& fg = f.grid();
  std::vector<GridField> slices(f.steps(), GridField(g));
  std::vector<int> idx(static_cast<std::size_t>(g.axes()));
  std::vector<int> fidx(idx.size());
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const int b = g.block_of_axis(static_cast<int>(a));
      fidx[a] = idx[a] + (fine.points[b] - coarse.points[b]) / 2;
    }
    const std::size_t from = fg.flatten(fidx);
    for (std::size_t k = 0; k < f.steps(); ++k) slices[k][flat] = f[k][from];
  }
  return SpaceTimeField(coarse.t0(), coarse.dt, std::move(slices));
}

double default_refinement_factor(const ChainParams& params) {
  return std::pow(2.0, 1.0 / params.block_degree(1));
}

double relative_drift(double a, double b) {
  if (a == 0.0) return b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(b - a) / std::abs(a);
}

}  // namespace kolmo::verify
