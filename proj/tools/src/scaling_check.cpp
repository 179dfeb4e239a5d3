#include "kolmo/evolution_ops.hpp"
#include "kolmo/random.hpp"
#include "kolmo/verify/ensemble.hpp"
#include "kolmo/verify/suites.hpp"

#include <cmath>
#include <numbers>

namespace kolmo::verify {

namespace {

// Real part of the trigonometric interpolant of a frequency-domain field at x.
double trig_eval(const GridField& fhat, const Eigen::VectorXd& x) {
  const Grid& g = fhat.grid();
  const int axes = g.axes();
  std::vector<cplx> work(fhat.values());
  std::size_t len = work.size();
  for (int a = axes - 1; a >= 0; --a) {
    const int na = g.axis_points(a);
    std::vector<cplx> phase(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k)
      phase[static_cast<std::size_t>(k)] =
          std::polar(1.0, g.frequency(a, k) * (x(a) + g.axis_half_length(a)));
    const std::size_t outer = len / static_cast<std::size_t>(na);
    for (std::size_t o = 0; o < outer; ++o) {
      cplx s = 0.0;
      const cplx* row = &work[o * static_cast<std::size_t>(na)];
      for (int k = 0; k < na; ++k) s += row[k] * phase[static_cast<std::size_t>(k)];
      work[o] = s;
    }
    len = outer;
  }
  return work[0].real() / std::sqrt(static_cast<double>(g.size()));
}

// Values of f at the points x + y of its own grid (spectral translation).
GridField translate(const GridField& f, const Eigen::VectorXd& y) {
  GridField fh = transform(f);
  const Grid& g = f.grid();
  std::vector<int> idx;
  for (std::size_t i = 0; i < fh.size(); ++i) {
    g.unflatten(i, idx);
    double ph = 0.0;
    for (int a = 0; a < g.axes(); ++a) ph += g.frequency(a, idx[static_cast<std::size_t>(a)]) * y(a);
    fh[i] *= std::polar(1.0, ph);
  }
  return inverse_transform(fh).real_part();
}

Eigen::VectorXd flow(const ChainParams& p, double t, const Eigen::VectorXd& x) {
  return mat_exp(p, t) * x;
}

}  // namespace

ScalingCheck scaling_identity_check(const Scenario& sc, int j, double r, int samples,
                                    bool printed_map) {
  const ChainParams& p = sc.params;
  const int n = p.n;
  const int d = p.d;
  const int per_axis = p.dim() <= 2 ? 64 : (p.dim() <= 3 ? 20 : 16);

  // Pulled-back problem lives on [-2, 2) per axis with time step 0.05; the original on the
  // dilated box with time step 0.05 r^2.
  std::vector<double> small_half(static_cast<std::size_t>(n), 2.0), big_half(static_cast<std::size_t>(n));
  for (int b = 1; b <= n; ++b) big_half[static_cast<std::size_t>(b - 1)] = 2.0 * std::pow(r, p.block_degree(b));
  const std::vector<int> pts(static_cast<std::size_t>(n), per_axis);
  const Grid small(p, small_half, pts);

  EnsembleSpec spec;
  spec.params = p;
  spec.half_lengths = big_half;
  spec.points = pts;
  spec.cutoffs.assign(static_cast<std::size_t>(n), 0.25);
  for (int b = 1; b <= n; ++b) spec.windows.push_back(0.6 * std::pow(r, p.block_degree(b)));
  const double dts = 0.05;
  spec.dt = dts * r * r;
  spec.lead_steps = 0;
  spec.knot_spacing = 8;
  spec.knots = 4;
  spec.seed = sc.seed ^ 0x5ca1eULL;
  const SpaceTimeField f = ensemble_member(spec, 0);

  const int center = 20;  // ball center slice; pulled-back times run from -1 to 1.8
  const double t0 = f.time(center);
  Eigen::VectorXd x0(p.dim());
  for (int b = 1; b <= n; ++b)
    for (int c = 0; c < d; ++c)
      x0((b - 1) * d + c) = (0.3 - 0.15 * c - 0.1 * b) * std::pow(r, p.block_degree(b));

  const double lambda = 1.0;
  const DiffusionProfile prof = sc.diffusion();
  const DiffusionProfile prof_small = DiffusionProfile::time_changed(prof, r * r, t0);

  // f~(s, x) = f(r^2 s + t0, Theta_r x + e^{r^2 s A} x0): on the small grid Theta_r x is exactly
  // a point of the big grid. printed_map uses e^{s A} x0 instead. The sample points are always
  // mapped with the first form, which carries Q_1(0) onto Q_r(t0, x0).
  std::vector<GridField> pulled;
  for (std::size_t k = 0; k < f.steps(); ++k) {
    const double s = (f.time(k) - t0) / (r * r);
    GridField moved = translate(f[k], flow(p, printed_map ? s : r * r * s, x0));
    pulled.emplace_back(small, moved.values(), Domain::physical);
  }
  const SpaceTimeField fs((f.t0() - t0) / (r * r), dts, pulled);

  const SpaceTimeField u = resolvent_all({p, prof, lambda}, f, f.t0());
  const SpaceTimeField us = resolvent_all({p, prof_small, lambda * r * r}, fs, fs.t0());

  const double gamma = 1.0 / p.block_degree(j);
  const int slices = 2 * center + 1;  // |s| <= 1
  std::vector<GridField> pu, pus;
  for (int k = 0; k < slices; ++k) {
    pu.push_back(transform(block_power(u[static_cast<std::size_t>(k)], j, gamma)));
    pus.push_back(transform(block_power(us[static_cast<std::size_t>(k)], j, gamma)));
  }

  Philox rng(sc.seed, 0x5ca1eULL + static_cast<std::uint64_t>(j));
  const Eigen::VectorXd theta = dilation_factors(p, r);
  std::vector<double> a(static_cast<std::size_t>(samples)), b(static_cast<std::size_t>(samples));
  double peak = 0.0;
  for (int m = 0; m < samples; ++m) {
    const int k = std::min(slices - 1, static_cast<int>(rng.uniform() * slices));
    const double s = fs.time(static_cast<std::size_t>(k));
    Eigen::VectorXd x(p.dim());
    for (int blk = 0; blk < n; ++blk) {
      Eigen::VectorXd v(d);
      do {
        for (int c = 0; c < d; ++c) v(c) = 2.0 * rng.uniform() - 1.0;
      } while (v.norm() > 1.0);
      x.segment(blk * d, d) = v;
    }
    const Eigen::VectorXd mapped = theta.cwiseProduct(x) + flow(p, r * r * s, x0);
    a[static_cast<std::size_t>(m)] = trig_eval(pu[static_cast<std::size_t>(k)], mapped);
    b[static_cast<std::size_t>(m)] = trig_eval(pus[static_cast<std::size_t>(k)], x);
    peak = std::max(peak, std::abs(b[static_cast<std::size_t>(m)]));
  }
  double c = 0.0;
  for (double v : b) c += v;
  c /= samples;
  ScalingCheck out;
  out.samples = samples;
  for (int m = 0; m < samples; ++m) {
    const auto i = static_cast<std::size_t>(m);
    out.lhs += (a[i] - c) * (a[i] - c);
    out.rhs += (b[i] - c) * (b[i] - c);
    out.max_pointwise = std::max(out.max_pointwise, std::abs(a[i] - b[i]));
  }
  out.lhs /= samples;
  out.rhs /= samples;
  out.relative_difference = std::abs(out.lhs - out.rhs) / out.rhs;
  if (peak > 0.0) out.max_pointwise /= peak;
  return out;
}

}  // namespace kolmo::verify
