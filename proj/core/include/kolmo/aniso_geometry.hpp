#pragma once

#include "kolmo/chain_model.hpp"
#include "kolmo/grid_field.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace kolmo {

struct SpaceTimePoint {
  double t = 0.0;
  Eigen::VectorXd x;
};

struct AnisoBall {
  SpaceTimePoint center;
  double r = 1.0;
};

/// max{|t|^{1/2}, |x_1|^{1/(2n-1)}, ..., |x_n|} with Euclidean block norms.
double ell(const ChainParams& params, double t, const Eigen::VectorXd& x);

/// ell(t - s, x - e^{(t-s)A} y): the gauge of p = (t, x) seen from q = (s, y).
double ell_from(const ChainParams& params, const SpaceTimePoint& p, const SpaceTimePoint& q);

/// Symmetrized gauge ell_from(p, q) + ell_from(q, p).
double rho(const ChainParams& params, const SpaceTimePoint& p, const SpaceTimePoint& q);

/// p in Q_r(center): ell_from(p, center) <= r.
bool ball_contains(const ChainParams& params, const AnisoBall& ball, const SpaceTimePoint& p);
/// p in the symmetrized ball: rho(p, center) <= r.
bool sym_ball_contains(const ChainParams& params, const AnisoBall& ball, const SpaceTimePoint& p);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);
/// Exact Lebesgue volume 2 omega_d^n r^{n^2 d + 2}.
double ball_volume(const ChainParams& params, double r);
/// Rejection-sampling estimate of |Q_r(center)| inside its bounding box.
double mc_ball_volume(const ChainParams& params, const AnisoBall& ball, long samples,
                      std::uint64_t seed);

/// Point on the boundary of Q_r(center) (scale = 1) or inside it (scale in [0, 1)), obtained by
/// rescaling a random offset onto the gauge sphere.
SpaceTimePoint sample_in_ball(const ChainParams& params, const AnisoBall& ball, double scale,
                              std::uint64_t seed, std::uint64_t stream);

/// Uniform random point in [-half, half]^{1 + n d}.
SpaceTimePoint random_point(const ChainParams& params, double half, std::uint64_t seed,
                            std::uint64_t stream);

using Triple = std::array<SpaceTimePoint, 3>;

struct TriangleRecord {
  double lhs_fwd = 0.0;  // ell_from(p, q)
  double lhs_bwd = 0.0;  // ell_from(q, p)
  double a = 0.0;        // ell_from(p, z)
  double b = 0.0;        // ell_from(z, q)
  double ratio_sym = 0.0;    // lhs_bwd / lhs_fwd, bounded by 3
  double ratio_split = 0.0;  // 3 lhs_fwd / (a + b), bounded by 12
  bool skipped = false;
};

struct TriangleReport {
  long samples = 0;
  long skipped = 0;
  double max_ratio_sym = 0.0;
  double max_ratio_split = 0.0;
  long violations_sym = 0;
  long violations_split = 0;
  std::vector<TriangleRecord> records;  // filled when requested
};

/// Checks ell(s-t, y - e^{(s-t)A} x) <= 3 ell(t-s, x - e^{(t-s)A} y) <= 12 (a + b) with
/// a = ell(t-r, x - e^{(t-r)A} z), b = ell(r-s, z - e^{(r-s)A} y). 0/0 ratios are skipped.
TriangleReport quasi_triangle_check(const ChainParams& params, const std::vector<Triple>& triples,
                                    bool keep_records = false);

/// Triples with coordinates uniform in [-half, half]^{1 + n d}.
std::vector<Triple> random_triples(const ChainParams& params, long count, double half,
                                   std::uint64_t seed);

/// Triples on one trajectory of the flow: (t, x), (s, e^{(s-t)A} x), (r, e^{(r-t)A} x).
/// For these ell_from(p, q) / (a + b) <= 1.
std::vector<Triple> flow_triples(const ChainParams& params, long count, double half,
                                 std::uint64_t seed);

/// Largest ell_from(p, q) / (a + b) over triples (no factor 3).
double max_plain_split_ratio(const ChainParams& params, const std::vector<Triple>& triples);

/// Two balls of equal radius sharing a witness point.
struct BallPair {
  AnisoBall first;
  AnisoBall second;
  SpaceTimePoint witness;  // lies in both balls
};

std::vector<BallPair> intersecting_pairs(const ChainParams& params, long count, double half,
                                         std::uint64_t seed);

struct EngulfReport {
  long pairs = 0;
  long samples = 0;
  long violations = 0;
  double factor = 20.0;
  double max_ratio = 0.0;  // worst ell_from(point, second center) / r
};

/// Samples points of the first ball (boundary and interior) and checks that they lie in the
/// factor * r ball around the second center.
EngulfReport engulf_check(const ChainParams& params, const std::vector<BallPair>& pairs,
                          int samples_per_pair, std::uint64_t seed, double factor = 20.0);

struct SandwichReport {
  long samples = 0;
  /// symmetrized ball inside the plain ball of the same radius
  long violations_inner = 0;
  /// plain ball inside the symmetrized ball of four times the radius
  long violations_outer = 0;
  /// points of Q_r outside the symmetrized ball of radius r (the reverse inclusion)
  long reverse_inclusion_failures = 0;
  double max_rho_over_ell = 0.0;
};

/// Checks the inclusions between Q_r and the symmetrized balls on random ball/point samples.
SandwichReport sandwich_check(const ChainParams& params, long samples, double half,
                              std::uint64_t seed);

/// Dyadic radii from below one cell (the first ball holds only the center cell) to half the
/// box of a space-time grid.
std::vector<double> dyadic_radii(const Grid& grid, double dt, std::size_t steps);

/// sup over radii of the average of |f| over discrete balls Q_r(t, x) (cell centers inside the
/// ball, restricted to the grid).
SpaceTimeField maximal_fn(const ChainParams& params, const SpaceTimeField& f,
                          const std::vector<double>& radii);

/// sup over radii of the mean oscillation of f over the same discrete balls.
SpaceTimeField sharp_fn(const ChainParams& params, const SpaceTimeField& f,
                        const std::vector<double>& radii);

double bmo_norm(const ChainParams& params, const SpaceTimeField& f, const std::vector<double>& radii);

struct FeffermanSteinReport {
  double p = 2.0;
  std::vector<double> ratios;  // ||f||_p / ||M# f||_p, skipped fields excluded
  long skipped = 0;
  double max_ratio = 0.0;
};

FeffermanSteinReport fefferman_stein_probe(const ChainParams& params,
                                           const std::vector<SpaceTimeField>& ensemble, double p,
                                           const std::vector<double>& radii);

/// CSV rows: triple coordinates, both sides of each inequality and the ratios.
void write_triangle_csv(const std::filesystem::path& path, const std::vector<Triple>& triples,
                        const TriangleReport& report);

}  // namespace kolmo
