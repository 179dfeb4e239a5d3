#include "kolmo/aniso_geometry.hpp"
#include "kolmo/random.hpp"
#include "kolmo/verify/ensemble.hpp"
#include "kolmo/verify/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kolmo::verify {

namespace {

// max over all samples of fn(a, b) for two space-time fields on one grid.
template <class F>
double max_over(const SpaceTimeField& a, const SpaceTimeField& b, F&& fn) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.steps(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) m = std::max(m, fn(a[k][i].real(), b[k][i].real()));
  return m;
}

SpaceTimeField combine(const SpaceTimeField& a, const SpaceTimeField& b) {
  std::vector<GridField> s;
  for (std::size_t k = 0; k < a.steps(); ++k) s.push_back(a[k] + b[k]);
  return SpaceTimeField(a.t0(), a.dt(), s);
}

EnsembleSpec fs_spec(const Scenario& sc) {
  EnsembleSpec e;
  e.params = sc.params;
  e.half_lengths.assign(static_cast<std::size_t>(sc.params.n), 4.0);
  e.points.assign(static_cast<std::size_t>(sc.params.n), sc.fs_points);
  e.cutoffs.assign(static_cast<std::size_t>(sc.params.n), 0.25);
  e.windows.assign(static_cast<std::size_t>(sc.params.n), 1.0);
  e.dt = 0.1;
  e.lead_steps = 1;
  e.knot_spacing = 1;
  e.knots = std::max(1, sc.fs_steps - 5);
  e.seed = sc.seed ^ 0xf5ULL;
  return e;
}

FeffermanSteinReport fs_level(const Scenario& sc, const EnsembleSpec& spec) {
  std::vector<SpaceTimeField> ensemble;
  for (int m = 0; m < sc.fs_members; ++m) ensemble.push_back(ensemble_member(spec, m, true));
  const auto radii = dyadic_radii(spec.grid(), spec.dt, static_cast<std::size_t>(spec.steps()));
  return fefferman_stein_probe(sc.params, ensemble, sc.fs_p, radii);
}

}  // namespace

SuiteResult suite_geometry(const Scenario& sc) {
  SuiteResult out;
  auto& recs = out.records;
  const ChainParams& p = sc.params;
  const std::uint64_t seed = sc.seed;

  {
    double worst = 0.0;
    Philox rng(seed, 0x9a0ULL);
    for (std::uint64_t k = 0; k < 10000; ++k) {
      const SpaceTimePoint z = random_point(p, 5.0, seed, 0x1000000ULL + k);
      const double r = std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
      const double base = ell(p, z.t, z.x);
      if (base == 0.0) continue;
      const double scaled = ell(p, r * r * z.t, dilation(p, r, z.x));
      worst = std::max(worst, std::abs(scaled - r * base) / (r * base));
    }
    CheckRecord r = check("geometry.gauge_scaling", "geometry.gauge-scaling");
    r.value("max_relative_error", worst).value("samples", 10000);
    r.predicted = 0.0;
    r.tolerance = sc.tol.identity;
    r.status = at_most(worst, sc.tol.identity);
    recs.push_back(r);
  }

  {
    long violations = 0;
    const long count = 20000;
    for (long k = 0; k < count; ++k) {
      const auto a = random_point(p, 10.0, seed, 0x2000000ULL + 2 * static_cast<std::uint64_t>(k));
      const auto b = random_point(p, 10.0, seed, 0x2000000ULL + 2 * static_cast<std::uint64_t>(k) + 1);
      if (ell(p, a.t + b.t, a.x + b.x) > (ell(p, a.t, a.x) + ell(p, b.t, b.x)) * (1.0 + 1e-14))
        ++violations;
    }
    CheckRecord r = check("geometry.subadditivity", "geometry.subadditivity");
    r.value("violations", static_cast<double>(violations)).value("pairs", static_cast<double>(count));
    r.predicted = 0.0;
    r.tolerance = 0.0;
    r.status = violations == 0 ? Status::pass : Status::fail;
    recs.push_back(r);
  }

  {
    const double expected = p.homogeneous_dim() + 2.0;
    const double slope = std::log(ball_volume(p, 2.0) / ball_volume(p, 1.0)) / std::log(2.0);
    CheckRecord r = check("geometry.volume_exponent", "geometry.volume");
    r.value("slope", slope);
    r.predicted = expected;
    r.tolerance = sc.tol.identity * expected;
    r.status = within(slope, expected, sc.tol.identity * expected);
    recs.push_back(r);

    const double omega_n = std::pow(unit_ball_volume(p.d), p.n);
    CheckRecord c = check("geometry.volume_constant", "geometry.volume");
    c.value("volume_unit_ball", ball_volume(p, 1.0)).value("omega_d_power_n", omega_n);
    c.value("ratio", ball_volume(p, 1.0) / omega_n);
    c.note = "exact product measure gives 2 omega_d^n; the time interval has length 2 r^2";
    recs.push_back(c);

    const AnisoBall ball{random_point(p, 1.0, seed, 0x3000000ULL), 0.8};
    const double mc = mc_ball_volume(p, ball, sc.mc_samples, seed);
    const double exact = ball_volume(p, 0.8);
    CheckRecord m = check("geometry.mc_volume", "geometry.volume");
    m.value("monte_carlo", mc).value("exact", exact).value("relative_error", std::abs(mc - exact) / exact);
    m.value("samples", static_cast<double>(sc.mc_samples));
    m.predicted = 0.0;
    m.tolerance = sc.tol.mc_volume;
    m.status = at_most(std::abs(mc - exact) / exact, sc.tol.mc_volume);
    recs.push_back(m);
  }

  {
    const auto triples = random_triples(p, sc.triples, 3.0, seed);
    const auto rep = quasi_triangle_check(p, triples, true);
    CheckRecord r = check("geometry.quasi_triangle", "geometry.quasi-triangle");
    r.value("samples", static_cast<double>(rep.samples)).value("skipped", static_cast<double>(rep.skipped));
    r.value("max_ratio_sym", rep.max_ratio_sym).value("max_ratio_split", rep.max_ratio_split);
    r.value("violations_factor_3", static_cast<double>(rep.violations_sym));
    r.value("violations_factor_12", static_cast<double>(rep.violations_split));
    r.predicted = 0.0;
    r.tolerance = 0.0;
    r.status = rep.violations_sym == 0 && rep.violations_split == 0 ? Status::pass : Status::fail;
    r.note = "ratio_sym bounded by 3, ratio_split by 12";
    recs.push_back(r);

    // Worst 200 triples by either ratio, plus every violation.
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto score = [&](std::size_t i) {
      const auto& t = rep.records[i];
      return t.skipped ? 0.0 : std::max(t.ratio_sym / 3.0, t.ratio_split / 12.0);
    };
    const std::size_t keep = std::min<std::size_t>(200, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = score(a), sb = score(b);
                        return sa != sb ? sa > sb : a < b;
                      });
    std::vector<Triple> worst;
    TriangleReport sub;
    for (std::size_t i = 0; i < keep; ++i) {
      worst.push_back(triples[order[i]]);
      sub.records.push_back(rep.records[order[i]]);
    }
    out.tables.push_back({"quasi_triangle_worst", "", [worst, sub](const std::filesystem::path& path) {
                            write_triangle_csv(path, worst, sub);
                          }});

    const double flow = max_plain_split_ratio(p, flow_triples(p, 10000, 3.0, seed));
    CheckRecord f = check("geometry.quasi_triangle_flow", "geometry.quasi-triangle");
    f.value("max_ratio", flow);
    f.predicted = 1.0;
    f.status = at_most(flow, 1.0 + 1e-12);
    f.note = "points on one trajectory: ell_from(p, q) <= a + b";
    recs.push_back(f);
  }

  {
    const auto pairs = intersecting_pairs(p, sc.pairs, 3.0, seed);
    const auto rep = engulf_check(p, pairs, sc.boundary_samples, seed);
    CheckRecord r = check("geometry.engulfing", "geometry.engulfing");
    r.value("pairs", static_cast<double>(rep.pairs)).value("samples", static_cast<double>(rep.samples));
    r.value("violations", static_cast<double>(rep.violations)).value("max_ratio", rep.max_ratio);
    r.predicted = 0.0;
    r.tolerance = 0.0;
    r.status = rep.violations == 0 ? Status::pass : Status::fail;
    r.note = "max_ratio is the worst ell_from(point, second center) / r, bounded by 20";
    recs.push_back(r);
  }

  {
    const auto rep = sandwich_check(p, sc.sandwich_samples, 3.0, seed);
    CheckRecord r = check("geometry.sandwich", "geometry.sandwich");
    r.value("samples", static_cast<double>(rep.samples));
    r.value("violations_inner", static_cast<double>(rep.violations_inner));
    r.value("violations_outer", static_cast<double>(rep.violations_outer));
    r.value("max_rho_over_ell", rep.max_rho_over_ell);
    r.predicted = 0.0;
    r.tolerance = 0.0;
    r.status = rep.violations_inner == 0 && rep.violations_outer == 0 ? Status::pass : Status::fail;
    recs.push_back(r);

    CheckRecord rev = check("geometry.sandwich_reverse", "geometry.sandwich");
    rev.value("failures", static_cast<double>(rep.reverse_inclusion_failures));
    rev.value("samples", static_cast<double>(rep.samples));
    rev.note = "points of Q_r outside the symmetrized ball of radius r; samples sit on the boundary of Q_r, where rho exceeds r whenever the backward gauge is nonzero";
    recs.push_back(rev);
  }

  try {
    const EnsembleSpec spec = fs_spec(sc);
    const auto radii = dyadic_radii(spec.grid(), spec.dt, static_cast<std::size_t>(spec.steps()));
    const SpaceTimeField f = ensemble_member(spec, 0, true);
    const SpaceTimeField g = ensemble_member(spec, 1, true);
    const SpaceTimeField fg = combine(f, g);
    const auto mf = maximal_fn(p, f, radii);
    const auto mg = maximal_fn(p, g, radii);
    const auto mfg = maximal_fn(p, fg, radii);
    const auto sf = sharp_fn(p, f, radii);

    std::vector<GridField> cs;
    for (std::size_t k = 0; k < f.steps(); ++k) cs.push_back(GridField::constant(f.grid(), -0.7));
    const SpaceTimeField c(f.t0(), f.dt(), cs);
    const auto mc = maximal_fn(p, c, radii);
    const auto sc_ = sharp_fn(p, c, radii);

    const double e_const = std::max(max_over(mc, mc, [](double a, double) { return std::abs(a - 0.7); }),
                                    max_over(sc_, sc_, [](double a, double) { return std::abs(a); }));
    const double e_point = max_over(f, mf, [](double a, double m) { return std::abs(a) - m; });
    const double e_sharp = max_over(sf, mf, [](double s, double m) { return s - 2.0 * m; });
    double e_sub = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.steps(); ++k)
      for (std::size_t i = 0; i < f[k].size(); ++i)
        e_sub = std::max(e_sub, mfg[k][i].real() - mf[k][i].real() - mg[k][i].real());

    CheckRecord r = check("geometry.maximal_identities", "geometry.maximal");
    r.value("constant_error", e_const);
    r.value("max_abs_minus_maximal", e_point);
    r.value("max_sharp_minus_twice_maximal", e_sharp);
    r.value("max_sublinearity_excess", e_sub);
    r.value("radii", static_cast<double>(radii.size()));
    r.predicted = 0.0;
    r.tolerance = sc.tol.identity;
    const bool ok = e_const <= sc.tol.identity && e_point <= sc.tol.identity &&
                    e_sharp <= sc.tol.identity && e_sub <= sc.tol.identity;
    r.status = ok ? Status::pass : Status::fail;
    r.note = "M c = |c|, c# = 0, |f| <= M f, f# <= 2 M f, M(f + g) <= M f + M g";
    recs.push_back(r);

    // Indicator of one ball minus its mean, as a fixed regression value.
    const AnisoBall ball{SpaceTimePoint{f.time(f.steps() / 2), Eigen::VectorXd::Zero(p.dim())}, 1.0};
    std::vector<GridField> ind;
    double total = 0.0;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < f.steps(); ++k) {
      GridField s(f.grid());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto x = s.point(i);
        const SpaceTimePoint z{f.time(k), Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))};
        s[i] = ball_contains(p, ball, z) ? 1.0 : 0.0;
        total += s[i].real();
        ++cells;
      }
      ind.push_back(s);
    }
    for (auto& s : ind)
      for (auto& v : s.values()) v -= total / static_cast<double>(cells);
    const auto irep = fefferman_stein_probe(p, {SpaceTimeField(f.t0(), f.dt(), ind)}, sc.fs_p, radii);
    CheckRecord ir = check("geometry.fefferman_stein_indicator", "geometry.fefferman-stein");
    ir.value("ratio", irep.max_ratio).value("p", sc.fs_p);
    ir.note = "indicator of Q_1 minus its mean";
    recs.push_back(ir);
  } catch (const std::exception& e) {
    recs.push_back(error_record("geometry.maximal_identities", "geometry.maximal", e));
  }

  try {
    const EnsembleSpec spec = fs_spec(sc);
    const auto coarse = fs_level(sc, spec);
    CheckRecord r = check("geometry.fefferman_stein", "geometry.fefferman-stein");
    r.value("p", sc.fs_p).value("coarse_max", coarse.max_ratio);
    r.value("members", sc.fs_members).value("skipped", static_cast<double>(coarse.skipped));
    r.note = "empirical constant, no predicted value";
    recs.push_back(r);
    if (sc.refine && sc.fs_refine) {
      const double factor = sc.refinement();
      const auto fine = fs_level(sc, refine(spec, factor));
      const double drift = relative_drift(coarse.max_ratio, fine.max_ratio);
      CheckRecord d = check("geometry.fefferman_stein_drift", "geometry.fefferman-stein");
      d.value("coarse_max", coarse.max_ratio).value("refined_max", fine.max_ratio);
      d.value("drift", drift).value("refinement_factor", factor);
      d.tolerance = sc.tol.fs_drift;
      d.status = std::isfinite(coarse.max_ratio) && drift <= sc.tol.fs_drift ? Status::pass : Status::fail;
      recs.push_back(d);
    }
  } catch (const std::exception& e) {
    recs.push_back(error_record("geometry.fefferman_stein", "geometry.fefferman-stein", e));
  }
  return out;
}

}  // namespace kolmo::verify
