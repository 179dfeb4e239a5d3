#include "kolmo/evolution_ops.hpp"
#include "kolmo/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace kolmo;

namespace {

constexpr double kPi = std::numbers::pi;

double trig_poly(double a, double b) {
  return std::cos(a + 0.3) + 0.5 * std::sin(2 * b) + 0.3 * std::cos(a - b);
}

GridField localized(const Grid& g, std::uint64_t seed, double cutoff, std::vector<double> widths) {
  return gaussian_window(random_bandlimited(g, seed, cutoff), widths);
}

double rel_l2(const GridField& a, const GridField& b) {
  GridField d = a;
  d -= b;
  return lp_norm(d, 2) / lp_norm(b, 2);
}

SpaceTimeField time_profile(const Grid& g, const GridField& shape, double t0, double dt, int steps,
                            const std::function<double(double)>& amp) {
  std::vector<GridField> slices;
  for (int k = 0; k < steps; ++k) {
    GridField s = shape;
    s *= amp(t0 + k * dt);
    slices.push_back(std::move(s));
  }
  return SpaceTimeField(t0, dt, std::move(slices));
}

}  // namespace

TEST(Semigroup, ConstantsAndIdentity) {
  ChainParams p(3, 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  Grid g(p, 4.0, 16);
  GridField c = GridField::constant(g, 2.5);
  GridField out = apply_semigroup({p, prof, 0.2, 1.3}, c);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i].real(), 2.5, 1e-12);
  GridField adj = apply_adjoint({p, prof, 0.2, 1.3}, c);
  for (std::size_t i = 0; i < adj.size(); ++i) EXPECT_NEAR(adj[i].real(), 2.5, 1e-12);
  GridField f = random_bandlimited(g, 3, 0.25);
  EXPECT_EQ(apply_semigroup({p, prof, 0.7, 0.7}, f).values(), f.values());
  EXPECT_EQ(apply_adjoint({p, prof, 0.7, 0.7}, f).values(), f.values());
  EXPECT_THROW(apply_semigroup({p, prof, 1.0, 0.5}, f), std::invalid_argument);
}

TEST(Semigroup, MatchesMonteCarloAverage) {
  ChainParams p(2, 1, 1.0);
  auto prof = DiffusionProfile::constant(1, 0.5);
  Grid g(p, kPi, 32);
  GridField f = GridField::from_function(g, [](std::span<const double> x) { return trig_poly(x[0], x[1]); });
  const double t = 1.0;
  GridField tf = apply_semigroup({p, prof, 0.0, t}, f);
  const int count = 100000;
  auto z = sample_exact(p, prof, 0.0, t, Eigen::VectorXd::Zero(2), count, 2024);
  const Eigen::MatrixXd m = mat_exp(p, t).entries();
  Philox pick(99);
  for (int probe = 0; probe < 16; ++probe) {
    const std::size_t flat = static_cast<std::size_t>(pick.next_u64() % g.size());
    auto x = f.point(flat);
    Eigen::Vector2d mx = m * Eigen::Vector2d(x[0], x[1]);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& zk : z) {
      const double v = trig_poly(mx[0] + zk[0], mx[1] + zk[1]);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum2 / count - mean * mean) / (count - 1));
    EXPECT_LE(std::abs(tf[flat].real() - mean), 3.0 * se) << "probe " << probe;
  }
}

TEST(Semigroup, AdjointDuality) {
  for (int n : {2, 3}) {
    ChainParams p(n, 1, 2.0);
    auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
    Grid g(p, 6.0, n == 2 ? 32 : 16);
    for (int k = 0; k < (n == 2 ? 30 : 20); ++k) {
      GridField f = random_bandlimited(g, 100 + k, 0.3);
      GridField h = random_bandlimited(g, 200 + k, 0.3);
      SemigroupSpec spec{p, prof, 0.1 * k, 0.1 * k + 0.5 + 0.05 * k};
      const double lhs = inner(h, apply_semigroup(spec, f));
      const double rhs = inner(apply_adjoint(spec, h), f);
      EXPECT_LE(std::abs(lhs - rhs), 1e-6 * lp_norm(f, 2) * lp_norm(h, 2));
    }
  }
}

TEST(Semigroup, MassPositivityAndContraction) {
  ChainParams p(2, 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  Grid g(p, kPi, 32);
  Grid fine(p, kPi, 128);
  auto fn = [](std::span<const double> x) { return trig_poly(x[0], x[1]); };
  GridField f = GridField::from_function(g, fn);
  GridField ff = GridField::from_function(fine, fn);
  double lo = 1e300, hi = -1e300;
  for (const auto& z : ff.values()) lo = std::min(lo, z.real()), hi = std::max(hi, z.real());
  const double sup = ff.max_abs();
  for (double t : {0.01, 0.3, 2.0}) {
    GridField tf = apply_semigroup({p, prof, 0.0, t}, f);
    double mass_f = 0.0, mass_tf = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mass_f += f[i].real(), mass_tf += tf[i].real();
    EXPECT_NEAR(mass_tf, mass_f, 1e-8 * std::max(1.0, std::abs(mass_f)) * f.size());
    for (const auto& z : tf.values()) {
      EXPECT_GE(z.real(), lo - 1e-6 * sup);
      EXPECT_LE(z.real(), hi + 1e-6 * sup);
    }
  }
}

TEST(Semigroup, ChapmanKolmogorov) {
  ChainParams p(2, 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  Grid g(p, {32.0, 16.0}, {128, 64});
  GridField f = localized(g, 7, 0.1, {2.0, 1.5});
  SemigroupSpec su{p, prof, 0.0, 1.0}, st{p, prof, 0.0, 0.4}, tu{p, prof, 0.4, 1.0};
  GridField direct = apply_semigroup(su, f);
  GridField composed = apply_semigroup(st, apply_semigroup(tu, f));
  EXPECT_LT(rel_l2(composed, direct), 1e-6);
}

TEST(Resolvent, ConstantInSpaceExamples) {
  ChainParams p(2, 1, 1.0);
  auto prof = DiffusionProfile::constant(1, 1.0);
  Grid g(p, 2.0, 8);
  GridField one = GridField::constant(g, 1.0);
  const double dt = 0.01;
  auto decaying = time_profile(g, one, 0.0, dt, 3001, [](double t) { return std::exp(-t); });
  ResolventSpec r0{p, prof, 0.0};
  GridField u = resolvent(r0, decaying, 0.0).u;
  for (const auto& z : u.values()) EXPECT_NEAR(z.real(), 1.0, 1e-4);

  auto flat = time_profile(g, one, 0.0, dt, 3001, [](double) { return 1.0; });
  ResolventSpec r1{p, prof, 1.0};
  GridField u1 = resolvent(r1, flat, 0.0).u;
  for (const auto& z : u1.values()) EXPECT_NEAR(z.real(), 1.0, 1e-4);

  // the recursion gives the same trapezoid sum at every slice
  auto all = resolvent_all(r1, flat, 0.0);
  for (double s : {0.0, 5.0, 12.5}) {
    GridField direct = resolvent(r1, flat, s).u;
    const std::size_t k = static_cast<std::size_t>(std::lround(s / dt));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(all[k][i].real(), direct[i].real(), 1e-10);
  }
}

TEST(Resolvent, ErrorsAndTail) {
  ChainParams p(2, 1, 1.0);
  auto prof = DiffusionProfile::constant(1, 1.0);
  Grid g(p, 2.0, 8);
  GridField one = GridField::constant(g, 1.0);
  auto flat = time_profile(g, one, 0.0, 0.01, 501, [](double) { return 1.0; });
  ResolventSpec r0{p, prof, 0.0};
  EXPECT_THROW(resolvent(r0, flat, 0.0), std::invalid_argument);
  ResolventSpec short_horizon{p, prof, 1.0, 1.0};
  try {
    resolvent(short_horizon, flat, 0.0);
    FAIL() << "expected a horizon error";
  } catch (const HorizonError& e) {
    EXPECT_GT(e.bound(), 0.0);
  }
  ResolventSpec negative{p, prof, -1.0};
  EXPECT_THROW(resolvent(negative, flat, 0.0), std::invalid_argument);
}

TEST(Resolvent, AgreesWithRecursionOnLocalizedData) {
  ChainParams p(2, 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  Grid g(p, {64.0, 24.0}, {128, 64});
  GridField shape = localized(g, 4, 0.05, {2.0, 1.5});
  auto f = time_profile(g, shape, 0.0, 0.05, 41,
                        [](double t) { return std::pow(std::sin(kPi * t / 2.0), 2); });
  ResolventSpec spec{p, prof, 0.5};
  auto all = resolvent_all(spec, f, -0.5);
  for (double s : {-0.5, 0.0, 0.75}) {
    GridField direct = resolvent(spec, f, s).u;
    const std::size_t k = static_cast<std::size_t>(std::lround((s + 0.5) / 0.05));
    EXPECT_LT(rel_l2(all[k], direct), 1e-6) << s;
  }
}

TEST(Resolvent, ResidualDecreasesUnderRefinement) {
  ChainParams p(2, 1, 1.0);
  auto prof = DiffusionProfile::constant(1, 0.5);
  Grid g(p, {16.0, 8.0}, {64, 32});
  GridField shape = localized(g, 5, 0.08, {2.5, 1.5});
  double prev = 1e300;
  for (double dt : {0.04, 0.02}) {
    const int steps = static_cast<int>(std::lround(2.0 / dt)) + 1;
    auto f = time_profile(g, shape, 0.0, dt, steps,
                          [](double t) { return std::pow(std::sin(kPi * t / 2.0), 2); });
    ResolventSpec spec{p, prof, 1.0};
    auto u = resolvent_all(spec, f, -1.0);
    const double res = resolvent_residual(p, prof, 1.0, u, f);
    EXPECT_LT(res, 5e-2);
    EXPECT_LT(res, prev);
    prev = res;
  }
}

TEST(Transport, Examples) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 2.0, 8);
  GridField one = GridField::constant(g, 1.0);
  const double dt = 0.01;
  auto decaying = time_profile(g, one, 0.0, dt, 3001, [](double t) { return std::exp(-t); });
  for (double s : {0.0, 1.0, 2.5}) {
    GridField u = transport_solve(p, 0.0, decaying, s).u;
    for (const auto& z : u.values()) EXPECT_NEAR(z.real(), std::exp(-s), 1e-4);
  }
  // data depending only on the last block is transported trivially
  Grid g2(p, {4.0, kPi}, {16, 16});
  GridField last = GridField::from_function(g2, [](std::span<const double> x) { return std::cos(x[1]); });
  auto stationary = time_profile(g2, last, 0.0, dt, 3001, [](double) { return 1.0; });
  const double lambda = 2.0;
  GridField u = transport_solve(p, lambda, stationary, 0.0).u;
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i].real(), last[i].real() / lambda, 1e-4);
}

TEST(Transport, VanishingDiffusionLimit) {
  ChainParams p(2, 1, 1e4);
  const double eps = 1e-4;
  auto prof = DiffusionProfile::constant(1, eps);
  Grid g(p, {16.0, 8.0}, {64, 32});
  GridField shape = localized(g, 8, 0.08, {2.0, 1.5});
  auto f = time_profile(g, shape, 0.0, 0.05, 41, [](double t) { return std::pow(std::sin(kPi * t / 2.0), 2); });
  GridField tr = transport_solve(p, 1.0, f, 0.0).u;
  GridField rs = resolvent({p, prof, 1.0}, f, 0.0).u;
  EXPECT_LT(rel_l2(rs, tr), 0.01);
}

TEST(Generator, ResidualSmallAndSecondOrder) {
  ChainParams p(2, 1, 2.0);
  auto prof = DiffusionProfile::smooth_periodic(1, 2.0);
  Grid g(p, {32.0, 16.0}, {128, 64});
  GridField c = GridField::constant(g, 1.0);
  EXPECT_NEAR(generator_residual({p, prof, 0.3, 1.0}, c, 1e-3), 0.0, 1e-10);
  GridField f = localized(g, 9, 0.08, {2.0, 1.5});
  SemigroupSpec spec{p, prof, 0.3, 1.0};
  const double r1 = generator_residual(spec, f, 2e-3);
  const double r2 = generator_residual(spec, f, 1e-3);
  EXPECT_LT(r2, 1e-3);
  EXPECT_NEAR(r1 / r2, 4.0, 0.6);
}

TEST(DecayProbe, PredictedExponents) {
  ChainParams p2(2, 1, 1.0);
  EXPECT_DOUBLE_EQ(predicted_decay_exponent(p2, 2, 0.0, {0, 1}), -0.5);
  EXPECT_DOUBLE_EQ(predicted_decay_exponent(p2, 1, 2.0 / 3.0, {0, 0}), -1.0);
  ChainParams p3(3, 1, 1.0);
  EXPECT_DOUBLE_EQ(predicted_decay_exponent(p3, 1, 1.0, {1, 0, 0}), -5.0);
}

TEST(DecayProbe, MeasuredSlopes) {
  ChainParams p(2, 1, 1.0);
  auto prof = DiffusionProfile::constant(1, 0.5);
  auto r = derivative_decay_probe(p, prof, 2, 0.0, {0, 1});
  EXPECT_NEAR(r.slope, -0.5, 0.07);
  auto r2 = derivative_decay_probe(p, prof, 1, 2.0 / 3.0, {0, 0});
  EXPECT_NEAR(r2.slope, -1.0, 0.07);
  DecayProbeOptions narrow;
  narrow.t_min = 0.1;
  narrow.t_max = 0.5;
  EXPECT_THROW(derivative_decay_probe(p, prof, 2, 0.0, {0, 1}, narrow), std::invalid_argument);
}
