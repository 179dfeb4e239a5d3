#include "kolmo/grid_field.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace kolmo;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Grid, Geometry) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, {2.0, 4.0}, {16, 8});
  EXPECT_EQ(g.size(), 128u);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.25);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(g.frequency(0, 1), kPi / 2.0);
  EXPECT_DOUBLE_EQ(g.frequency(0, 15), -kPi / 2.0);
  EXPECT_DOUBLE_EQ(g.frequency(0, 8), -8 * kPi / 2.0);
  std::vector<int> idx;
  g.unflatten(37, idx);
  EXPECT_EQ(g.flatten(idx), 37u);
  EXPECT_THROW(Grid(p, 1.0, 7), std::invalid_argument);
  EXPECT_THROW(Grid(p, 1.0, 6), std::invalid_argument);
  EXPECT_THROW(Grid(p, -1.0, 8), std::invalid_argument);
}

TEST(Transform, RoundTripAndParseval) {
  ChainParams p(2, 2, 1.0);
  Grid g(p, {3.0, 5.0}, {16, 8});
  GridField f = random_bandlimited(g, 3, 0.5);
  GridField F = transform(f);
  EXPECT_EQ(F.domain(), Domain::frequency);
  EXPECT_NEAR(l2_norm_spectral(F), lp_norm(f, 2), 1e-10 * lp_norm(f, 2));
  GridField back = inverse_transform(F);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
  EXPECT_LT(err, 1e-12 * f.max_abs());
  EXPECT_THROW(transform(F), std::invalid_argument);
  EXPECT_THROW(inverse_transform(f), std::invalid_argument);
}

TEST(FracLaplacian, EigenfunctionsAndConsistency) {
  ChainParams p(2, 1, 1.0);
  const double L = kPi;
  Grid g(p, L, 32);
  // sin(3 x1) cos(2 x2): eigenfunction of each block Laplacian
  GridField f = GridField::from_function(g, [](std::span<const double> x) {
    return std::sin(3 * x[0]) * std::cos(2 * x[1]);
  });
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    GridField g1 = frac_laplacian(f, 1, alpha);
    GridField g2 = frac_laplacian(f, 2, alpha);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_NEAR(g1[i].real(), -std::pow(3.0, alpha) * f[i].real(), 1e-10);
      EXPECT_NEAR(g2[i].real(), -std::pow(2.0, alpha) * f[i].real(), 1e-10);
    }
  }
  // alpha = 2 is the block Laplacian: second spectral derivative
  GridField r = random_bandlimited(g, 5, 0.3);
  GridField lap = frac_laplacian(r, 1, 2.0);
  GridField d2 = spectral_derivative(r, 0, 2);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(lap[i].real(), d2[i].real(), 1e-9 * r.max_abs() * 100);
  // semigroup in alpha: (-Delta)^{a/2} (-Delta)^{b/2} = (-Delta)^{(a+b)/2}
  GridField ab = frac_laplacian(frac_laplacian(r, 1, 0.6), 1, 0.8);
  GridField direct = frac_laplacian(r, 1, 1.4);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(ab[i].real(), -direct[i].real(), 1e-9);
  EXPECT_THROW(frac_laplacian(r, 3, 1.0), std::invalid_argument);
}

TEST(Norms, ConstantsAndOrdering) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, {1.0, 2.0}, {8, 8});
  GridField c = GridField::constant(g, 3.0);
  const double vol = 8.0;
  EXPECT_NEAR(lp_norm(c, 1), 3.0 * vol, 1e-12);
  EXPECT_NEAR(lp_norm(c, 2), 3.0 * std::sqrt(vol), 1e-12);
  EXPECT_NEAR(lp_norm(c, std::numeric_limits<double>::infinity()), 3.0, 1e-12);
  EXPECT_THROW(lp_norm(c, 0.5), std::invalid_argument);
  SpaceTimeField st(0.0, 0.5, {c, c, c});
  EXPECT_NEAR(lp_norm(st, 2), 3.0 * std::sqrt(vol * 1.5), 1e-12);
}

TEST(Shear, SpectralTranslationIsExactForTrigPolynomials) {
  ChainParams p(3, 1, 1.0);
  Grid g(p, kPi, 16);
  auto fn = [](double a, double b, double c) { return std::cos(2 * a + 1.0) * std::sin(b) + std::cos(3 * c) + 0.5 * std::sin(a - 2 * b); };
  GridField f = GridField::from_function(g, [&](std::span<const double> x) { return fn(x[0], x[1], x[2]); });
  for (double t : {0.3, -1.1, 2.0}) {
    BlockMatrix m = mat_exp(p, t);
    GridField out = shear_resample(f, m);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto x = f.point(i);
      Eigen::Vector3d y = m.entries() * Eigen::Vector3d(x[0], x[1], x[2]);
      err = std::max(err, std::abs(out[i].real() - fn(y[0], y[1], y[2])));
    }
    EXPECT_LT(err, 1e-11) << t;
  }
}

TEST(Shear, SplineConvergesAtFourthOrder) {
  ChainParams p(2, 1, 1.0);
  auto fn = [](double a, double b) { return std::exp(std::sin(a) + 0.5 * std::cos(b)); };
  double prev = 0.0;
  for (int N : {32, 64, 128}) {
    Grid g(p, kPi, N);
    GridField f = GridField::from_function(g, [&](std::span<const double> x) { return fn(x[0], x[1]); });
    Eigen::MatrixXd mm(2, 2);
    mm << 1.0, 0.37, 0.21, 0.9;
    BlockMatrix m(p, mm);
    GridField out = shear_resample(f, m, ShearMethod::cubic_spline);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto x = f.point(i);
      Eigen::Vector2d y = mm * Eigen::Vector2d(x[0], x[1]);
      err = std::max(err, std::abs(out[i].real() - fn(y[0], y[1])));
    }
    if (prev > 0.0) EXPECT_GT(prev / err, 10.0) << N;
    prev = err;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Shear, SplineReproducesSamplesUnderIdentity) {
  ChainParams p(2, 2, 1.0);
  Grid g(p, 2.0, 8);
  GridField f = random_bandlimited(g, 1, 0.5);
  GridField out = shear_resample(f, BlockMatrix(p, Eigen::MatrixXd::Identity(4, 4)), ShearMethod::cubic_spline);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(out[i].real(), f[i].real(), 1e-12);
  EXPECT_FALSE(is_unit_block_upper(BlockMatrix(p, 2.0 * Eigen::MatrixXd::Identity(4, 4))));
  EXPECT_THROW(shear_resample(f, BlockMatrix(p, 2.0 * Eigen::MatrixXd::Identity(4, 4)),
                              ShearMethod::spectral_translation),
               std::invalid_argument);
}

TEST(RandomField, RealDeterministicBandlimited) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 3.0, 32);
  GridField a = random_bandlimited(g, 17, 0.125, 1.0);
  GridField b = random_bandlimited(g, 17, 0.125, 1.0);
  GridField c = random_bandlimited(g, 18, 0.125, 1.0);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  GridField F = transform(a);
  std::vector<int> idx;
  for (std::size_t i = 0; i < F.size(); ++i) {
    g.unflatten(i, idx);
    const int k0 = std::min(idx[0], 32 - idx[0]);
    const int k1 = std::min(idx[1], 32 - idx[1]);
    if (k0 > 4 || k1 > 4) {
      EXPECT_LT(std::abs(F[i]), 1e-12);
    }
  }
  // tiny cutoff leaves only the mean
  GridField m = random_bandlimited(g, 17, 1e-6);
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_NEAR(m[i].real(), m[0].real(), 1e-12);
  EXPECT_THROW(random_bandlimited(g, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(random_bandlimited(g, 1, 0.6), std::invalid_argument);
}

TEST(RandomField, SharedModesAgreeAcrossGrids) {
  // same box, twice the points, half the cutoff: one trig polynomial sampled twice as densely
  ChainParams p(2, 1, 1.0);
  Grid coarse(p, 3.0, 16);
  Grid fine(p, 3.0, 32);
  GridField a = random_bandlimited(coarse, 9, 0.25);
  GridField b = random_bandlimited(fine, 9, 0.125);
  const double scale = std::sqrt(32.0 * 32.0 / (16.0 * 16.0));
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < 16; ++k) {
      const std::vector<int> ci{i, k}, fi{2 * i, 2 * k};
      EXPECT_NEAR(b[fine.flatten(fi)].real() * scale, a[coarse.flatten(ci)].real(), 1e-12);
    }
}

TEST(Export, BinaryRoundTripAndCsv) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, {1.5, 2.5}, {8, 10});
  GridField f = random_bandlimited(g, 4, 0.5);
  auto dir = std::filesystem::temp_directory_path() / "kolmo_grid_io";
  std::filesystem::create_directories(dir);
  write_binary(f, dir / "f.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "f.bin"), (2 + 2 + 2 + 80) * sizeof(double));
  GridField back = read_binary(dir / "f.bin");
  EXPECT_EQ(back.grid(), g);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i].real(), f[i].real());
  write_csv(f, dir / "f.csv");
  EXPECT_GT(std::filesystem::file_size(dir / "f.csv"), 0u);
  std::filesystem::remove_all(dir);
}

TEST(SpaceTime, LinearInterpolation) {
  ChainParams p(2, 1, 1.0);
  Grid g(p, 1.0, 8);
  SpaceTimeField st(1.0, 0.5, {GridField::constant(g, 0.0), GridField::constant(g, 2.0)});
  EXPECT_NEAR(st.at(1.25)[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(st.at(1.5)[3].real(), 2.0, 1e-14);
  EXPECT_EQ(st.at(3.0)[0], cplx(0.0, 0.0));
}
