#include "kolmo/aniso_geometry.hpp"
#include "kolmo/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace kolmo;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

SpaceTimeField stack(const Grid& g, int steps, double dt,
                     const std::function<double(double, std::span<const double>)>& fn) {
  std::vector<GridField> slices;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    slices.push_back(GridField::from_function(g, [&](std::span<const double> x) { return fn(t, x); }));
  }
  return SpaceTimeField(0.0, dt, std::move(slices));
}

}  // namespace

TEST(Gauge, Examples) {
  const ChainParams p(2, 1, 1.0);
  EXPECT_DOUBLE_EQ(ell(p, 4.0, vec({0, 0})), 2.0);
  EXPECT_DOUBLE_EQ(ell(p, 1.0, vec({1, 1})), 1.0);
  EXPECT_NEAR(ell(p, 9.0, vec({27, 3})), 3.0, 1e-15);
  EXPECT_EQ(ell(p, 0.0, vec({0, 0})), 0.0);
  const ChainParams p2(2, 2, 1.0);
  // Euclidean block norm: |(3,4)| = 5 in the last block.
  EXPECT_DOUBLE_EQ(ell(p2, 0.0, vec({0, 0, 3, 4})), 5.0);
}

TEST(Gauge, ScalingIdentity) {
  for (int n : {2, 3, 4}) {
    const ChainParams p(n, 2, 1.0);
    Philox rng(11, static_cast<std::uint64_t>(n));
    for (int k = 0; k < 200; ++k) {
      const double t = 4.0 * rng.uniform() - 2.0;
      Eigen::VectorXd x(p.dim());
      for (int a = 0; a < p.dim(); ++a) x[a] = 4.0 * rng.uniform() - 2.0;
      const double r = 0.1 + 5.0 * rng.uniform();
      const double lhs = ell(p, r * r * t, dilation(p, r, x));
      const double rhs = r * ell(p, t, x);
      EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
    }
  }
}

TEST(Gauge, Subadditivity) {
  for (int n : {2, 3}) {
    const ChainParams p(n, 1, 1.0);
    long violations = 0;
    for (std::uint64_t k = 0; k < 20000; ++k) {
      const SpaceTimePoint a = random_point(p, 10.0, 5, 2 * k);
      const SpaceTimePoint b = random_point(p, 10.0, 5, 2 * k + 1);
      if (ell(p, a.t + b.t, a.x + b.x) > ell(p, a.t, a.x) + ell(p, b.t, b.x) * (1.0 + 1e-14))
        ++violations;
    }
    EXPECT_EQ(violations, 0);
  }
}

TEST(Ball, Membership) {
  const ChainParams p(2, 1, 1.0);
  const AnisoBall origin{SpaceTimePoint{0.0, vec({0, 0})}, 1.0};
  EXPECT_TRUE(ball_contains(p, origin, SpaceTimePoint{0.5, vec({0, 0})}));
  EXPECT_FALSE(ball_contains(p, origin, SpaceTimePoint{1.5, vec({0, 0})}));
  const AnisoBall b{SpaceTimePoint{0.3, vec({2.0, -1.0})}, 0.7};
  for (double r : {1e-6, 0.5, 3.0})
    EXPECT_TRUE(ball_contains(p, AnisoBall{b.center, r}, b.center));
  for (double tau : {-0.45, -0.1, 0.2, 0.45}) {
    const Eigen::VectorXd x = mat_exp(p, tau) * b.center.x;
    EXPECT_TRUE(ball_contains(p, b, SpaceTimePoint{b.center.t + tau, x}));
  }
  const double tau = 0.6;
  EXPECT_FALSE(ball_contains(p, b, SpaceTimePoint{b.center.t + tau, mat_exp(p, tau) * b.center.x}));
}

TEST(Ball, SampledPointsLieOnTheGaugeSphere) {
  const ChainParams p(3, 2, 1.0);
  const AnisoBall b{SpaceTimePoint{1.0, Eigen::VectorXd::LinSpaced(6, -1, 1)}, 0.8};
  for (std::uint64_t k = 0; k < 100; ++k) {
    EXPECT_NEAR(ell_from(p, sample_in_ball(p, b, 1.0, 3, k), b.center), 0.8, 1e-12);
    EXPECT_NEAR(ell_from(p, sample_in_ball(p, b, 0.25, 3, k), b.center), 0.2, 1e-12);
  }
}

TEST(Ball, VolumeClosedForm) {
  const ChainParams p(2, 1, 1.0);
  EXPECT_DOUBLE_EQ(ball_volume(p, 1.0), 8.0);
  EXPECT_NEAR(ball_volume(p, 2.0) / ball_volume(p, 1.0), 64.0, 1e-12);
  for (int n : {2, 3}) {
    for (int d : {1, 2, 3}) {
      const ChainParams q(n, d, 1.0);
      const double slope = std::log(ball_volume(q, 3.0) / ball_volume(q, 0.5)) / std::log(6.0);
      EXPECT_NEAR(slope, n * n * d + 2, 1e-12 * (n * n * d + 2));
    }
  }
  EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
  EXPECT_THROW(ball_volume(p, 0.0), std::invalid_argument);
}

TEST(Ball, MonteCarloVolume) {
  struct Case {
    ChainParams p;
    AnisoBall b;
  };
  const std::vector<Case> cases = {
      {ChainParams(2, 1, 1.0), AnisoBall{SpaceTimePoint{0.2, vec({0.3, -0.2})}, 1.0}},
      {ChainParams(2, 2, 1.0), AnisoBall{SpaceTimePoint{-1.0, vec({0.1, 0.2, -0.3, 0.1})}, 0.9}},
      {ChainParams(3, 1, 1.0), AnisoBall{SpaceTimePoint{0.0, vec({0.2, 0.1, -0.1})}, 1.1}},
  };
  for (const auto& c : cases) {
    const double mc = mc_ball_volume(c.p, c.b, 1000000, 9);
    EXPECT_NEAR(mc / ball_volume(c.p, c.b.r), 1.0, 0.01);
  }
}

TEST(QuasiTriangle, RandomSweepHasNoViolations) {
  for (int n : {2, 3}) {
    const ChainParams p(n, 1, 1.0);
    const auto triples = random_triples(p, 20000, 10.0, 17);
    const TriangleReport rep = quasi_triangle_check(p, triples);
    EXPECT_EQ(rep.samples, 20000);
    EXPECT_EQ(rep.violations_sym, 0);
    EXPECT_EQ(rep.violations_split, 0);
    EXPECT_LE(rep.max_ratio_sym, 3.0);
    EXPECT_LE(rep.max_ratio_split, 12.0);
    EXPECT_GT(rep.max_ratio_sym, 1.0);
  }
}

TEST(QuasiTriangle, DegenerateTripleIsSkipped) {
  const ChainParams p(2, 1, 1.0);
  const SpaceTimePoint a{1.0, vec({2, 3})};
  const TriangleReport rep = quasi_triangle_check(p, {Triple{a, a, a}});
  EXPECT_EQ(rep.skipped, 1);
  EXPECT_EQ(rep.violations_sym + rep.violations_split, 0);
}

TEST(QuasiTriangle, FlowTriplesAreSubadditive) {
  for (int n : {2, 3}) {
    const ChainParams p(n, 1, 1.0);
    const auto triples = flow_triples(p, 5000, 5.0, 23);
    EXPECT_LE(max_plain_split_ratio(p, triples), 1.0 + 1e-9);
  }
}

TEST(QuasiTriangle, CsvHasOneRowPerTriple) {
  const ChainParams p(2, 1, 1.0);
  const auto triples = random_triples(p, 10, 1.0, 1);
  const auto rep = quasi_triangle_check(p, triples, true);
  const auto path = std::filesystem::temp_directory_path() / "kolmo_triangle.csv";
  write_triangle_csv(path, triples, rep);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("p_t,p_x1,p_x2,q_t", 0), 0u);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 10);
  std::filesystem::remove(path);
}

TEST(Engulf, IntersectingBallsAreSwallowed) {
  for (int n : {2, 3}) {
    const ChainParams p(n, 1, 1.0);
    const auto pairs = intersecting_pairs(p, 500, 5.0, 31);
    for (const auto& bp : pairs) {
      EXPECT_LE(ell_from(p, bp.witness, bp.first.center), bp.first.r * (1.0 + 1e-9));
      EXPECT_LE(ell_from(p, bp.witness, bp.second.center), bp.second.r * (1.0 + 1e-9));
    }
    const EngulfReport rep = engulf_check(p, pairs, 100, 7);
    EXPECT_EQ(rep.violations, 0);
    EXPECT_LE(rep.max_ratio, 20.0);
    EXPECT_EQ(rep.samples, 500 * 100);
  }
  const ChainParams p(2, 1, 1.0);
  const AnisoBall b{SpaceTimePoint{0.0, vec({1, 1})}, 1.0};
  const EngulfReport same = engulf_check(p, {BallPair{b, b, b.center}}, 200, 3);
  EXPECT_LE(same.max_ratio, 1.0 + 1e-12);
}

TEST(Sandwich, CorrectedOrderHolds) {
  for (int n : {2, 3}) {
    const ChainParams p(n, 1, 1.0);
    const SandwichReport rep = sandwich_check(p, 20000, 10.0, 41);
    EXPECT_EQ(rep.violations_inner, 0);
    EXPECT_EQ(rep.violations_outer, 0);
    EXPECT_LE(rep.max_rho_over_ell, 4.0);
  }
  // Q_1 at the origin contains (1, 0) while rho of that point is 2.
  const ChainParams p(2, 1, 1.0);
  const AnisoBall b{SpaceTimePoint{0.0, vec({0, 0})}, 1.0};
  const SpaceTimePoint q{1.0, vec({0, 0})};
  EXPECT_TRUE(ball_contains(p, b, q));
  EXPECT_DOUBLE_EQ(rho(p, q, b.center), 2.0);
  EXPECT_FALSE(sym_ball_contains(p, b, q));
}

class MaximalTest : public ::testing::Test {
 protected:
  ChainParams p{2, 1, 1.0};
  Grid g{p, std::vector<double>{2.0, 1.0}, std::vector<int>{16, 12}};
  double dt = 0.05;
  int steps = 10;
  std::vector<double> radii = dyadic_radii(g, dt, steps);
};

TEST_F(MaximalTest, RadiiSpanCellToHalfBox) {
  ASSERT_GE(radii.size(), 2u);
  EXPECT_LE(radii.front(), std::sqrt(dt));
  for (std::size_t k = 1; k < radii.size(); ++k) EXPECT_DOUBLE_EQ(radii[k], 2.0 * radii[k - 1]);
}

TEST_F(MaximalTest, ConstantField) {
  const auto f = stack(g, steps, dt, [](double, std::span<const double>) { return -2.5; });
  const auto m = maximal_fn(p, f, radii);
  const auto s = sharp_fn(p, f, radii);
  for (std::size_t k = 0; k < f.steps(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(m[k][i].real(), 2.5, 1e-14);
      EXPECT_NEAR(s[k][i].real(), 0.0, 1e-14);
    }
  EXPECT_NEAR(bmo_norm(p, f, radii), 0.0, 1e-14);
}

TEST_F(MaximalTest, PointwiseBoundsAndSublinearity) {
  const auto f = stack(g, steps, dt, [](double t, std::span<const double> x) {
    return std::sin(3 * x[0] + t) * std::cos(5 * x[1]) + 0.3 * x[0];
  });
  const auto h = stack(g, steps, dt, [](double t, std::span<const double> x) {
    return (x[1] > 0.2 ? 1.0 : -0.5) * std::exp(-t);
  });
  std::vector<GridField> sum_slices;
  for (std::size_t k = 0; k < f.steps(); ++k) sum_slices.push_back(f[k] + h[k]);
  const SpaceTimeField fh(0.0, dt, std::move(sum_slices));
  const auto mf = maximal_fn(p, f, radii);
  const auto mh = maximal_fn(p, h, radii);
  const auto mfh = maximal_fn(p, fh, radii);
  const auto sf = sharp_fn(p, f, radii);
  for (std::size_t k = 0; k < f.steps(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_GE(mf[k][i].real(), std::abs(f[k][i].real()));
      EXPECT_LE(mfh[k][i].real(), mf[k][i].real() + mh[k][i].real() + 1e-14);
      EXPECT_LE(sf[k][i].real(), 2.0 * mf[k][i].real() + 1e-14);
    }
}

TEST_F(MaximalTest, SubCellRadiusGivesCellValue) {
  const auto f = stack(g, steps, dt, [](double t, std::span<const double> x) {
    return x[0] - 2.0 * x[1] + t;
  });
  const auto m = maximal_fn(p, f, {1e-4});
  const auto s = sharp_fn(p, f, {1e-4});
  for (std::size_t k = 0; k < f.steps(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_DOUBLE_EQ(m[k][i].real(), std::abs(f[k][i].real()));
      EXPECT_EQ(s[k][i].real(), 0.0);
    }
}

TEST_F(MaximalTest, IndicatorOfBall) {
  const AnisoBall b{SpaceTimePoint{0.2, vec({0.0, 0.0})}, 0.6};
  const auto f = stack(g, steps, dt, [&](double t, std::span<const double> x) {
    return ball_contains(p, b, SpaceTimePoint{t, vec({x[0], x[1]})}) ? 1.0 : 0.0;
  });
  const auto m = maximal_fn(p, f, radii);
  long inside = 0;
  for (std::size_t k = 0; k < f.steps(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (f[k][i].real() == 1.0) {
        ++inside;
        EXPECT_DOUBLE_EQ(m[k][i].real(), 1.0);
      }
  EXPECT_GT(inside, 10);
  // Oscillation of an indicator over any set is 2 m (1 - m) <= 1/2.
  const double bmo = bmo_norm(p, f, radii);
  EXPECT_GT(bmo, 0.0);
  EXPECT_LE(bmo, 0.5 + 1e-14);
}

TEST_F(MaximalTest, HalfSpaceIndicatorBmo) {
  const auto f = stack(g, steps, dt,
                       [](double, std::span<const double> x) { return x[1] >= 0.0 ? 1.0 : 0.0; });
  const double bmo = bmo_norm(p, f, radii);
  EXPECT_GT(bmo, 0.0);
  EXPECT_LE(bmo, 1.0);
}

TEST_F(MaximalTest, FeffermanSteinProbe) {
  std::vector<SpaceTimeField> ensemble;
  ensemble.push_back(stack(g, steps, dt, [](double, std::span<const double>) { return 0.0; }));
  ensemble.push_back(stack(g, steps, dt, [](double t, std::span<const double> x) {
    return std::sin(2 * x[0]) * std::cos(3 * x[1] + t);
  }));
  const auto rep = fefferman_stein_probe(p, ensemble, 4.0, radii);
  EXPECT_EQ(rep.skipped, 1);
  ASSERT_EQ(rep.ratios.size(), 1u);
  EXPECT_TRUE(std::isfinite(rep.max_ratio));
  EXPECT_GT(rep.max_ratio, 0.0);
  EXPECT_THROW(fefferman_stein_probe(p, ensemble, 1.0, radii), std::invalid_argument);
}
