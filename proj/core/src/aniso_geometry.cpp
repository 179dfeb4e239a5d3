#include "kolmo/aniso_geometry.hpp"

#include "kolmo/parallel.hpp"
#include "kolmo/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kolmo {

namespace {

// (x - e^{tau A} y) without forming the matrix: block i of e^{tau A} y is
// sum_{k >= i} tau^{k-i}/(k-i)! y_k.
void flow_difference(const ChainParams& p, double tau, const double* x, const double* y,
                     double* out) {
  const int n = p.n;
  const int d = p.d;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      double coeff = 1.0;
      for (int k = i; k < n; ++k) {
        acc += coeff * y[k * d + c];
        coeff *= tau / (k - i + 1);
      }
      out[i * d + c] = x[i * d + c] - acc;
    }
  }
}

double gauge(const ChainParams& p, double t, const double* x) {
  double best = std::sqrt(std::abs(t));
  for (int j = 1; j <= p.n; ++j) {
    double sq = 0.0;
    for (int c = 0; c < p.d; ++c) {
      const double v = x[(j - 1) * p.d + c];
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    const int deg = p.block_degree(j);
    const double g = deg == 1 ? norm : std::pow(norm, 1.0 / deg);
    best = std::max(best, g);
  }
  return best;
}

void check_point(const ChainParams& p, const SpaceTimePoint& q) {
  if (q.x.size() != p.dim()) throw std::invalid_argument("point dimension does not match n d");
}

double ell_raw(const ChainParams& p, const SpaceTimePoint& a, const SpaceTimePoint& b,
               std::vector<double>& buf) {
  buf.resize(p.dim());
  flow_difference(p, a.t - b.t, a.x.data(), b.x.data(), buf.data());
  return gauge(p, a.t - b.t, buf.data());
}

Eigen::VectorXd flow(const ChainParams& p, double tau, const Eigen::VectorXd& y) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.dim());
  Eigen::VectorXd out(p.dim());
  flow_difference(p, tau, zero.data(), y.data(), out.data());
  return -out;
}

}  // namespace

double ell(const ChainParams& params, double t, const Eigen::VectorXd& x) {
  if (x.size() != params.dim()) throw std::invalid_argument("point dimension does not match n d");
  return gauge(params, t, x.data());
}

double ell_from(const ChainParams& params, const SpaceTimePoint& p, const SpaceTimePoint& q) {
  check_point(params, p);
  check_point(params, q);
  std::vector<double> buf;
  return ell_raw(params, p, q, buf);
}

double rho(const ChainParams& params, const SpaceTimePoint& p, const SpaceTimePoint& q) {
  return ell_from(params, p, q) + ell_from(params, q, p);
}

bool ball_contains(const ChainParams& params, const AnisoBall& ball, const SpaceTimePoint& p) {
  return ell_from(params, p, ball.center) <= ball.r;
}

bool sym_ball_contains(const ChainParams& params, const AnisoBall& ball,
                       const SpaceTimePoint& p) {
  return rho(params, p, ball.center) <= ball.r;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double ball_volume(const ChainParams& params, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  double v = 2.0 * r * r;
  for (int j = 1; j <= params.n; ++j)
    v *= unit_ball_volume(params.d) * std::pow(r, params.block_degree(j) * params.d);
  return v;
}

double mc_ball_volume(const ChainParams& params, const AnisoBall& ball, long samples,
                      std::uint64_t seed) {
  check_point(params, ball.center);
  const int dim = params.dim();
  const double r = ball.r;
  const double tau = r * r;
  // Spatial bounding box: the range of e^{s A} x0 over |s| <= r^2 plus the block radius.
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  const int probes = 2001;
  for (int k = 0; k < probes; ++k) {
    const double s = -tau + 2.0 * tau * k / (probes - 1);
    const Eigen::VectorXd c = flow(params, s, ball.center.x);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  // The trajectory is polynomial in s; pad by the sampling error bound through a margin.
  for (int a = 0; a < dim; ++a) {
    const int deg = params.block_degree(a / params.d + 1);
    const double rad = std::pow(r, deg);
    const double pad = 1e-3 * (hi[a] - lo[a]) + rad;
    lo[a] -= pad;
    hi[a] += pad;
  }
  double box = 2.0 * tau;
  for (int a = 0; a < dim; ++a) box *= hi[a] - lo[a];

  Philox rng(seed, 0);
  long hits = 0;
  SpaceTimePoint q{0.0, Eigen::VectorXd(dim)};
  std::vector<double> buf;
  for (long k = 0; k < samples; ++k) {
    q.t = ball.center.t - tau + 2.0 * tau * rng.uniform();
    for (int a = 0; a < dim; ++a) q.x[a] = lo[a] + (hi[a] - lo[a]) * rng.uniform();
    if (ell_raw(params, q, ball.center, buf) <= r) ++hits;
  }
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

SpaceTimePoint sample_in_ball(const ChainParams& params, const AnisoBall& ball, double scale,
                              std::uint64_t seed, std::uint64_t stream) {
  check_point(params, ball.center);
  Philox rng(seed, stream);
  const int dim = params.dim();
  double tau = 0.0;
  Eigen::VectorXd y(dim);
  double g = 0.0;
  while (g == 0.0) {
    tau = 2.0 * rng.uniform() - 1.0;
    for (int a = 0; a < dim; ++a) y[a] = 2.0 * rng.uniform() - 1.0;
    g = gauge(params, tau, y.data());
  }
  // Dilating by s multiplies the gauge by s.
  const double s = scale * ball.r / g;
  tau *= s * s;
  y = dilation(params, s, y);
  SpaceTimePoint p;
  p.t = ball.center.t + tau;
  p.x = flow(params, tau, ball.center.x) + y;
  return p;
}

SpaceTimePoint random_point(const ChainParams& params, double half, std::uint64_t seed,
                            std::uint64_t stream) {
  Philox rng(seed, stream);
  SpaceTimePoint p;
  p.t = half * (2.0 * rng.uniform() - 1.0);
  p.x.resize(params.dim());
  for (int a = 0; a < params.dim(); ++a) p.x[a] = half * (2.0 * rng.uniform() - 1.0);
  return p;
}

TriangleReport quasi_triangle_check(const ChainParams& params, const std::vector<Triple>& triples,
                                    bool keep_records) {
  TriangleReport rep;
  if (keep_records) rep.records.reserve(triples.size());
  std::vector<double> buf;
  for (const Triple& tr : triples) {
    const SpaceTimePoint& p = tr[0];
    const SpaceTimePoint& q = tr[1];
    const SpaceTimePoint& z = tr[2];
    for (const auto& pt : tr) check_point(params, pt);
    TriangleRecord rec;
    rec.lhs_fwd = ell_raw(params, p, q, buf);
    rec.lhs_bwd = ell_raw(params, q, p, buf);
    rec.a = ell_raw(params, p, z, buf);
    rec.b = ell_raw(params, z, q, buf);
    ++rep.samples;
    if (rec.lhs_fwd == 0.0 || rec.a + rec.b == 0.0) {
      rec.skipped = true;
      ++rep.skipped;
    }
    if (rec.lhs_fwd > 0.0) {
      rec.ratio_sym = rec.lhs_bwd / rec.lhs_fwd;
      rep.max_ratio_sym = std::max(rep.max_ratio_sym, rec.ratio_sym);
      if (rec.ratio_sym > 3.0) ++rep.violations_sym;
    }
    if (rec.a + rec.b > 0.0) {
      rec.ratio_split = 3.0 * rec.lhs_fwd / (rec.a + rec.b);
      rep.max_ratio_split = std::max(rep.max_ratio_split, rec.ratio_split);
      if (rec.ratio_split > 12.0) ++rep.violations_split;
    } else if (rec.lhs_fwd > 0.0) {
      // Nonzero left side against a zero right side.
      rec.ratio_split = std::numeric_limits<double>::infinity();
      rep.max_ratio_split = rec.ratio_split;
      ++rep.violations_split;
    }
    if (keep_records) rep.records.push_back(rec);
  }
  return rep;
}

std::vector<Triple> random_triples(const ChainParams& params, long count, double half,
                                   std::uint64_t seed) {
  std::vector<Triple> out;
  out.reserve(count);
  for (long k = 0; k < count; ++k) {
    const auto s = static_cast<std::uint64_t>(3 * k);
    out.push_back({random_point(params, half, seed, s), random_point(params, half, seed, s + 1),
                   random_point(params, half, seed, s + 2)});
  }
  return out;
}

std::vector<Triple> flow_triples(const ChainParams& params, long count, double half,
                                 std::uint64_t seed) {
  std::vector<Triple> out;
  out.reserve(count);
  for (long k = 0; k < count; ++k) {
    Philox rng(seed, static_cast<std::uint64_t>(k));
    SpaceTimePoint p = random_point(params, half, seed ^ 0x5eedULL, static_cast<std::uint64_t>(k));
    const double s = half * (2.0 * rng.uniform() - 1.0);
    const double r = half * (2.0 * rng.uniform() - 1.0);
    SpaceTimePoint q{s, flow(params, s - p.t, p.x)};
    SpaceTimePoint z{r, flow(params, r - p.t, p.x)};
    out.push_back({p, q, z});
  }
  return out;
}

double max_plain_split_ratio(const ChainParams& params, const std::vector<Triple>& triples) {
  const TriangleReport rep = quasi_triangle_check(params, triples);
  return rep.max_ratio_split / 3.0;
}

std::vector<BallPair> intersecting_pairs(const ChainParams& params, long count, double half,
                                         std::uint64_t seed) {
  std::vector<BallPair> out;
  out.reserve(count);
  for (long k = 0; k < count; ++k) {
    const auto st = static_cast<std::uint64_t>(4 * k);
    Philox rng(seed, st);
    const SpaceTimePoint w = random_point(params, half, seed, st + 1);
    const double r = 0.01 + half * rng.uniform();
    const double f1 = rng.uniform();
    const double f2 = rng.uniform();
    // Centers c with w in Q_r(c): w = (t0 + tau, e^{tau A} x0 + y) with ell(tau, y) <= r,
    // so x0 = e^{-tau A}(w.x - y).
    auto center_for = [&](double frac, std::uint64_t stream) {
      const SpaceTimePoint off =
          sample_in_ball(params, AnisoBall{SpaceTimePoint{0.0, Eigen::VectorXd::Zero(params.dim())}, r},
                         frac, seed, stream);
      SpaceTimePoint c;
      c.t = w.t - off.t;
      c.x = flow(params, -off.t, w.x - off.x);
      return c;
    };
    out.push_back({AnisoBall{center_for(f1, st + 2), r}, AnisoBall{center_for(f2, st + 3), r}, w});
  }
  return out;
}

EngulfReport engulf_check(const ChainParams& params, const std::vector<BallPair>& pairs,
                          int samples_per_pair, std::uint64_t seed, double factor) {
  EngulfReport rep;
  rep.factor = factor;
  rep.pairs = static_cast<long>(pairs.size());
  std::vector<double> ratios(pairs.size(), 0.0);
  std::vector<long> bad(pairs.size(), 0);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const BallPair& bp = pairs[k];
    std::vector<double> buf;
    for (int m = 0; m < samples_per_pair; ++m) {
      // Three quarters of the samples on the boundary, the rest inside.
      Philox rng(seed, (static_cast<std::uint64_t>(k) << 20) ^ static_cast<std::uint64_t>(m));
      const double scale = (m % 4 == 3) ? rng.uniform() : 1.0;
      const SpaceTimePoint p = sample_in_ball(
          params, bp.first, scale, seed + 1,
          (static_cast<std::uint64_t>(k) << 20) ^ static_cast<std::uint64_t>(m));
      const double ratio = ell_raw(params, p, bp.second.center, buf) / bp.second.r;
      ratios[k] = std::max(ratios[k], ratio);
      if (ratio > factor) ++bad[k];
    }
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rep.max_ratio = std::max(rep.max_ratio, ratios[k]);
    rep.violations += bad[k];
    rep.samples += samples_per_pair;
  }
  return rep;
}

SandwichReport sandwich_check(const ChainParams& params, long samples, double half,
                              std::uint64_t seed) {
  SandwichReport rep;
  std::vector<double> buf;
  for (long k = 0; k < samples; ++k) {
    const auto st = static_cast<std::uint64_t>(2 * k);
    const SpaceTimePoint c = random_point(params, half, seed, st);
    const SpaceTimePoint p = random_point(params, half, seed, st + 1);
    const double fwd = ell_raw(params, p, c, buf);
    const double bwd = ell_raw(params, c, p, buf);
    const double rh = fwd + bwd;
    ++rep.samples;
    if (fwd > 0.0) rep.max_rho_over_ell = std::max(rep.max_rho_over_ell, rh / fwd);
    // With r = rho(p, c), p lies in the symmetrized ball; it must lie in Q_r.
    if (fwd > rh) ++rep.violations_inner;
    // With r = fwd, p lies in Q_r; it must lie in the symmetrized ball of radius 4r.
    if (rh > 4.0 * fwd) ++rep.violations_outer;
    // Same p against the symmetrized ball of radius r itself.
    if (rh > fwd) ++rep.reverse_inclusion_failures;
  }
  return rep;
}

std::vector<double> dyadic_radii(const Grid& grid, double dt, std::size_t steps) {
  const ChainParams& p = grid.params();
  double r_min = std::sqrt(dt);
  double r_max = std::sqrt(0.5 * dt * static_cast<double>(steps > 0 ? steps - 1 : 0));
  for (int j = 1; j <= p.n; ++j) {
    const double inv = 1.0 / p.block_degree(j);
    r_min = std::min(r_min, std::pow(grid.spacing(j - 1), inv));
    r_max = std::max(r_max, std::pow(grid.half_length(j - 1), inv));
  }
  // Start strictly below one cell in every direction so the first ball is the point's own cell.
  r_min *= 0.5;
  std::vector<double> out;
  for (double r = r_min; r <= r_max * (1.0 + 1e-12); r *= 2.0) out.push_back(r);
  if (out.empty()) out.push_back(r_min);
  return out;
}

namespace {

// Visits the grid cells of f whose centers lie in Q_r(t_k, x_i), restricted to the grid.
template <class Visit>
void for_each_in_ball(const ChainParams& params, const SpaceTimeField& f, std::size_t k,
                      const std::vector<double>& x, double r, std::vector<int>& lo,
                      std::vector<int>& hi, std::vector<int>& idx, std::vector<double>& center,
                      Visit&& visit) {
  const Grid& g = f.grid();
  const int dim = g.axes();
  const int d = params.d;
  const double dt = f.dt();
  const double tol = 1e-12;
  const double r2 = r * r;
  const auto steps = static_cast<long>(f.steps());
  const long reach = static_cast<long>(std::floor(r2 / dt * (1.0 + tol)));
  const long k0 = std::max<long>(0, static_cast<long>(k) - reach);
  const long k1 = std::min<long>(steps - 1, static_cast<long>(k) + reach);
  std::vector<double> radius(params.n);
  for (int j = 1; j <= params.n; ++j) radius[j - 1] = std::pow(r, params.block_degree(j));

  std::vector<double> zero(dim, 0.0);
  for (long kk = k0; kk <= k1; ++kk) {
    const double tau = (kk - static_cast<long>(k)) * dt;
    if (std::abs(tau) > r2 * (1.0 + tol)) continue;
    // Center of the slice: e^{tau A} x.
    flow_difference(params, tau, zero.data(), x.data(), center.data());
    bool empty = false;
    for (int a = 0; a < dim; ++a) {
      center[a] = -center[a];
      const double h = g.axis_spacing(a);
      const double L = g.axis_half_length(a);
      const double rad = radius[a / d] * (1.0 + tol);
      lo[a] = std::max(0, static_cast<int>(std::ceil((center[a] - rad + L) / h - tol)));
      hi[a] = std::min(g.axis_points(a) - 1,
                       static_cast<int>(std::floor((center[a] + rad + L) / h + tol)));
      if (lo[a] > hi[a]) empty = true;
    }
    if (empty) continue;
    idx = lo;
    const GridField& slice = f[static_cast<std::size_t>(kk)];
    while (true) {
      bool inside = true;
      if (d > 1) {
        for (int j = 0; j < params.n && inside; ++j) {
          double sq = 0.0;
          for (int c = 0; c < d; ++c) {
            const int a = j * d + c;
            const double v = g.coordinate(a, idx[a]) - center[a];
            sq += v * v;
          }
          inside = std::sqrt(sq) <= radius[j] * (1.0 + tol);
        }
      }
      if (inside) visit(slice[g.flatten(idx)].real());
      int a = dim - 1;
      while (a >= 0 && idx[a] == hi[a]) {
        idx[a] = lo[a];
        --a;
      }
      if (a < 0) break;
      ++idx[a];
    }
  }
}

enum class BallStat { maximal, sharp };

SpaceTimeField ball_sup(const ChainParams& params, const SpaceTimeField& f,
                        const std::vector<double>& radii, BallStat stat) {
  if (radii.empty()) throw std::invalid_argument("radius list is empty");
  for (double r : radii)
    if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
  if (f.grid().params().n != params.n || f.grid().params().d != params.d)
    throw std::invalid_argument("field grid does not match params");
  const Grid& g = f.grid();
  const std::size_t per = g.size();
  const std::size_t total = per * f.steps();
  std::vector<double> out(total, 0.0);
  parallel_for(total, [&](std::size_t flat) {
    const std::size_t k = flat / per;
    const std::size_t i = flat % per;
    const int dim = g.axes();
    std::vector<int> idx(dim), lo(dim), hi(dim);
    std::vector<double> x(dim), center(dim);
    g.unflatten(i, idx);
    for (int a = 0; a < dim; ++a) x[a] = g.coordinate(a, idx[a]);
    const double own = f[k][i].real();
    double best = 0.0;
    std::vector<double> vals;
    for (double r : radii) {
      vals.clear();
      for_each_in_ball(params, f, k, x, r, lo, hi, idx, center,
                       [&](double v) { vals.push_back(v); });
      if (vals.empty()) vals.push_back(own);
      double value = 0.0;
      if (stat == BallStat::maximal) {
        for (double v : vals) value += std::abs(v);
        value /= static_cast<double>(vals.size());
      } else {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        for (double v : vals) value += std::abs(v - mean);
        value /= static_cast<double>(vals.size());
      }
      best = std::max(best, value);
    }
    out[flat] = best;
  });
  std::vector<GridField> slices;
  slices.reserve(f.steps());
  for (std::size_t k = 0; k < f.steps(); ++k) {
    GridField s(g);
    for (std::size_t i = 0; i < per; ++i) s[i] = out[k * per + i];
    slices.push_back(std::move(s));
  }
  return SpaceTimeField(f.t0(), f.dt(), std::move(slices));
}

double grid_max(const SpaceTimeField& f) {
  double m = 0.0;
  for (const auto& s : f.slices()) m = std::max(m, s.max_abs());
  return m;
}

}  // namespace

SpaceTimeField maximal_fn(const ChainParams& params, const SpaceTimeField& f,
                          const std::vector<double>& radii) {
  return ball_sup(params, f, radii, BallStat::maximal);
}

SpaceTimeField sharp_fn(const ChainParams& params, const SpaceTimeField& f,
                        const std::vector<double>& radii) {
  return ball_sup(params, f, radii, BallStat::sharp);
}

double bmo_norm(const ChainParams& params, const SpaceTimeField& f,
                const std::vector<double>& radii) {
  return grid_max(sharp_fn(params, f, radii));
}

FeffermanSteinReport fefferman_stein_probe(const ChainParams& params,
                                           const std::vector<SpaceTimeField>& ensemble, double p,
                                           const std::vector<double>& radii) {
  if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("p must lie in (1, inf)");
  FeffermanSteinReport rep;
  rep.p = p;
  for (const auto& f : ensemble) {
    const double num = lp_norm(f, p);
    const double den = lp_norm(sharp_fn(params, f, radii), p);
    if (num == 0.0 || den == 0.0) {
      ++rep.skipped;
      continue;
    }
    rep.ratios.push_back(num / den);
    rep.max_ratio = std::max(rep.max_ratio, num / den);
  }
  return rep;
}

void write_triangle_csv(const std::filesystem::path& path, const std::vector<Triple>& triples,
                        const TriangleReport& report) {
  if (report.records.size() != triples.size())
    throw std::invalid_argument("report has no per-triple records for these triples");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  const auto dim = triples.empty() ? 0 : triples.front()[0].x.size();
  const char* names[3] = {"p", "q", "z"};
  for (const char* nm : names) {
    out << nm << "_t,";
    for (Eigen::Index a = 0; a < dim; ++a) out << nm << "_x" << (a + 1) << ',';
  }
  out << "ell_pq,ell_qp,ell_pz,ell_zq,ratio_sym,ratio_split,skipped\n";
  for (std::size_t k = 0; k < triples.size(); ++k) {
    for (const auto& pt : triples[k]) {
      out << pt.t << ',';
      for (Eigen::Index a = 0; a < dim; ++a) out << pt.x[a] << ',';
    }
    const auto& r = report.records[k];
    out << r.lhs_fwd << ',' << r.lhs_bwd << ',' << r.a << ',' << r.b << ',' << r.ratio_sym << ','
        << r.ratio_split << ',' << (r.skipped ? 1 : 0) << '\n';
  }
}

}  // namespace kolmo
