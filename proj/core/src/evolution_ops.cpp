#include "kolmo/evolution_ops.hpp"

#include "kolmo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace kolmo {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Index k with time(k) == t; LONG_MIN when t is off the grid.
long slice_offset(const SpaceTimeField& f, double t) {
  const double u = (t - f.t0()) / f.dt();
  const double r = std::round(u);
  if (std::abs(u - r) > 1e-6) return std::numeric_limits<long>::min();
  return static_cast<long>(r);
}

double slice_norm(const SpaceTimeField& f, long k) {
  if (k < 0 || k >= static_cast<long>(f.steps())) return 0.0;
  return lp_norm(f[static_cast<std::size_t>(k)], 2);
}

GridField slice_or_zero(const SpaceTimeField& f, long k) {
  if (k < 0 || k >= static_cast<long>(f.steps())) return GridField(f.grid());
  return f[static_cast<std::size_t>(k)];
}

double spacetime_norm(const SpaceTimeField& f) { return lp_norm(f, 2); }

using Step = std::function<GridField(double s, double t, const GridField&)>;

// Direct trapezoid: sum_m w_m e^{-lambda t_m} P_{s, s+t_m} f(s + t_m).
ResolventResult direct_quadrature(const Step& step, double lambda, double horizon,
                                  double tail_tolerance, const SpaceTimeField& f, double s) {
  require(lambda >= 0.0, "resolvent: lambda must be >= 0");
  const long k0 = slice_offset(f, s);
  require(k0 != std::numeric_limits<long>::min(), "resolvent: s must lie on the time grid of f");
  const long last = static_cast<long>(f.steps()) - 1;
  const double dt = f.dt();
  const double window_end = f.horizon() - s;
  require(window_end >= 0.0, "resolvent: s lies after the sampled window");
  const double T = horizon > 0.0 ? std::min(horizon, window_end) : window_end;
  const long m_last = static_cast<long>(std::floor(T / dt + 1e-9));

  const double fnorm = spacetime_norm(f);
  if (lambda == 0.0) {
    // u is only defined when f has compact time support inside the window
    double peak = 0.0;
    for (long k = 0; k <= last; ++k) peak = std::max(peak, slice_norm(f, k));
    if (slice_norm(f, last) > 1e-8 * peak)
      throw std::invalid_argument("resolvent: lambda = 0 needs f with compact time support inside the window");
  }

  double tail = 0.0;
  for (long m = m_last + 1; k0 + m <= last; ++m)
    tail += std::exp(-lambda * m * dt) * slice_norm(f, k0 + m) * dt;
  if (tail > tail_tolerance * std::max(fnorm, std::numeric_limits<double>::min())) {
    std::ostringstream os;
    os << "resolvent: horizon " << T << " leaves a tail bound of " << tail << " (tolerance "
       << tail_tolerance * fnorm << ")";
    throw HorizonError(os.str(), tail);
  }

  std::vector<GridField> terms(static_cast<std::size_t>(m_last + 1), GridField(f.grid()));
  std::vector<char> used(terms.size(), 0);
  parallel_for(terms.size(), [&](std::size_t m) {
    const long k = k0 + static_cast<long>(m);
    if (k < 0 || k > last) return;
    const double t = static_cast<double>(m) * dt;
    double w = dt * std::exp(-lambda * t);
    if (m == 0 || static_cast<long>(m) == m_last) w *= 0.5;
    if (m_last == 0) w = 0.0;
    terms[m] = step(s, s + t, f[static_cast<std::size_t>(k)]);
    terms[m] *= w;
    used[m] = 1;
  });
  GridField u(f.grid());
  for (std::size_t m = 0; m < terms.size(); ++m)
    if (used[m]) u += terms[m];
  return {std::move(u), tail, T, static_cast<int>(m_last + 1)};
}

// Backward recursion over every slice from s_begin to the end of f's window.
SpaceTimeField recursive_quadrature(const Step& step, double lambda, const SpaceTimeField& f,
                                    double s_begin) {
  require(lambda >= 0.0, "resolvent: lambda must be >= 0");
  const long off = slice_offset(f, s_begin);
  require(off != std::numeric_limits<long>::min() && off <= 0,
          "resolvent_all: s_begin must lie on the time grid of f, at or before its start");
  const long last = static_cast<long>(f.steps()) - 1;
  const long count = last - off + 1;
  const double dt = f.dt();
  const double decay = std::exp(-lambda * dt);

  std::vector<GridField> u(static_cast<std::size_t>(count), GridField(f.grid()));
  // v carries the trapezoid sum with an unhalved right end; w corrects that end weight
  GridField v = slice_or_zero(f, last);
  v *= 0.5 * dt;
  const bool end_nonzero = f[static_cast<std::size_t>(last)].max_abs() > 0.0;
  GridField w = f[static_cast<std::size_t>(last)];
  w *= 0.5 * dt;
  u[static_cast<std::size_t>(count - 1)] = GridField(f.grid());
  for (long i = count - 2; i >= 0; --i) {
    const long k = off + i;
    const double s = f.time(0) + static_cast<double>(k) * dt;
    GridField next = slice_or_zero(f, k + 1);
    next *= 0.5 * dt;
    next += v;
    v = step(s, s + dt, next);
    v *= decay;
    v.axpy(0.5 * dt, slice_or_zero(f, k));
    if (end_nonzero) {
      w = step(s, s + dt, w);
      w *= decay;
    }
    GridField ui = v;
    if (end_nonzero) ui -= w;
    u[static_cast<std::size_t>(i)] = std::move(ui);
  }
  return SpaceTimeField(f.t0() + static_cast<double>(off) * dt, dt, std::move(u));
}

Step diffusion_step(const ChainParams& params, const DiffusionProfile& profile, int quad_nodes) {
  return [=](double s, double t, const GridField& g) {
    return apply_semigroup(SemigroupSpec{params, profile, s, t, quad_nodes}, g);
  };
}

Step transport_step(const ChainParams& params) {
  return [=](double s, double t, const GridField& g) {
    if (t == s) return g;
    return shear_resample(g, mat_exp(params, t - s)).real_part();
  };
}

}  // namespace

GridField gaussian_convolve(const GridField& f, const Eigen::MatrixXd& cov) {
  const int dim = static_cast<int>(cov.rows());
  return apply_multiplier(f, [&](std::span<const double> xi) {
    double q = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) q += xi[a] * cov(a, b) * xi[b];
    return std::exp(-0.5 * q);
  });
}

GridField apply_semigroup(const SemigroupSpec& spec, const GridField& f) {
  require(spec.t >= spec.s, "apply_semigroup: need s <= t");
  require(f.domain() == Domain::physical, "apply_semigroup: field must be in the physical domain");
  if (spec.t == spec.s) return f;
  const Eigen::MatrixXd cov = raw_covariance(spec.params, spec.profile, spec.s, spec.t, spec.quad_nodes);
  GridField smoothed = gaussian_convolve(f, cov);
  return shear_resample(smoothed, mat_exp(spec.params, spec.t - spec.s)).real_part();
}

GridField apply_adjoint(const SemigroupSpec& spec, const GridField& f) {
  require(spec.t >= spec.s, "apply_adjoint: need s <= t");
  require(f.domain() == Domain::physical, "apply_adjoint: field must be in the physical domain");
  if (spec.t == spec.s) return f;
  const Eigen::MatrixXd cov = raw_covariance(spec.params, spec.profile, spec.s, spec.t, spec.quad_nodes);
  GridField back = shear_transpose(f, mat_exp(spec.params, spec.t - spec.s));
  return gaussian_convolve(back.real_part(), cov).real_part();
}

ResolventResult resolvent(const ResolventSpec& spec, const SpaceTimeField& f, double s) {
  return direct_quadrature(diffusion_step(spec.params, spec.profile, spec.quad_nodes), spec.lambda,
                           spec.horizon, spec.tail_tolerance, f, s);
}

SpaceTimeField resolvent_all(const ResolventSpec& spec, const SpaceTimeField& f, double s_begin) {
  return recursive_quadrature(diffusion_step(spec.params, spec.profile, spec.quad_nodes),
                              spec.lambda, f, s_begin);
}

ResolventResult transport_solve(const ChainParams& params, double lambda, const SpaceTimeField& f,
                                double s, double tail_tolerance) {
  return direct_quadrature(transport_step(params), lambda, 0.0, tail_tolerance, f, s);
}

SpaceTimeField transport_all(const ChainParams& params, double lambda, const SpaceTimeField& f,
                             double s_begin) {
  return recursive_quadrature(transport_step(params), lambda, f, s_begin);
}

GridField drift_apply(const ChainParams& params, const GridField& u) {
  require(u.domain() == Domain::physical, "drift_apply: field must be in the physical domain");
  const Grid& g = u.grid();
  const int d = params.d;
  GridField out(g);
  std::vector<double> x;
  for (int j = 0; j + 1 < params.n; ++j)
    for (int c = 0; c < d; ++c) {
      const int axis = j * d + c;
      const int src = (j + 1) * d + c;
      GridField du = spectral_derivative(u, axis, 1);
      std::vector<int> idx;
      for (std::size_t i = 0; i < du.size(); ++i) {
        g.unflatten(i, idx);
        out[i] += g.coordinate(src, idx[src]) * du[i];
      }
    }
  return out;
}

GridField generator_apply(const ChainParams& params, const Eigen::MatrixXd& a, const GridField& u) {
  require(a.rows() == params.d && a.cols() == params.d, "generator_apply: a must be d x d");
  const int off = (params.n - 1) * params.d;
  const int d = params.d;
  GridField diff = apply_multiplier(u, [&](std::span<const double> xi) {
    double q = 0.0;
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) q += xi[off + i] * a(i, k) * xi[off + k];
    return -q;
  });
  diff += drift_apply(params, u);
  return diff.real_part();
}

double generator_residual(const SemigroupSpec& spec, const GridField& f, double h_s) {
  require(h_s > 0.0, "generator_residual: h_s must be positive");
  require(spec.s + h_s <= spec.t, "generator_residual: s + h_s must not exceed t");
  const double fn = lp_norm(f, 2);
  if (fn == 0.0) return 0.0;
  SemigroupSpec lo = spec, hi = spec;
  lo.s = spec.s - h_s;
  hi.s = spec.s + h_s;
  GridField res = apply_semigroup(hi, f);
  res -= apply_semigroup(lo, f);
  res *= 1.0 / (2.0 * h_s);
  res += generator_apply(spec.params, spec.profile(spec.s), apply_semigroup(spec, f));
  return lp_norm(res, 2) / fn;
}

double resolvent_residual(const ChainParams& params, const DiffusionProfile& profile, double lambda,
                          const SpaceTimeField& u, const SpaceTimeField& f, bool diffusion) {
  require(u.steps() >= 3, "resolvent_residual: need at least three slices");
  require(std::abs(u.dt() - f.dt()) <= 1e-12 * f.dt(), "resolvent_residual: time steps differ");
  const double dt = u.dt();
  std::vector<double> res_sq(u.steps(), 0.0), f_sq(u.steps(), 0.0);
  parallel_for(u.steps() - 2, [&](std::size_t i) {
    const std::size_t k = i + 1;
    const double s = u.time(k);
    GridField fk = f.at(s);
    GridField r = u[k + 1];
    r -= u[k - 1];
    r *= 1.0 / (2.0 * dt);
    if (diffusion)
      r += generator_apply(params, profile(s), u[k]);
    else
      r += drift_apply(params, u[k]).real_part();
    r.axpy(-lambda, u[k]);
    r += fk;
    res_sq[k] = std::pow(lp_norm(r, 2), 2);
    f_sq[k] = std::pow(lp_norm(fk, 2), 2);
  });
  double rs = 0.0, fs = 0.0;
  for (std::size_t k = 0; k < u.steps(); ++k) rs += res_sq[k], fs += f_sq[k];
  return fs > 0.0 ? std::sqrt(rs / fs) : 0.0;
}

double predicted_decay_exponent(const ChainParams& params, int j, double alpha,
                                const std::vector<int>& beta) {
  require(static_cast<int>(beta.size()) == params.n, "decay exponent: beta must have n entries");
  require(j >= 1 && j <= params.n, "decay exponent: block index out of range");
  double e = params.block_degree(j) * alpha;
  for (int i = 1; i <= params.n; ++i) e += params.block_degree(i) * beta[i - 1];
  return -e / 2.0;
}

DecayProbeResult derivative_decay_probe(const ChainParams& params, const DiffusionProfile& profile,
                                        int j, double alpha, const std::vector<int>& beta,
                                        const DecayProbeOptions& opt) {
  DecayProbeResult out;
  out.predicted = predicted_decay_exponent(params, j, alpha, beta);
  require(alpha >= 0.0, "derivative_decay_probe: alpha must be >= 0");
  for (int b : beta) require(b >= 0, "derivative_decay_probe: beta must be non-negative");
  require(opt.lags >= 2 && opt.t_min > 0.0, "derivative_decay_probe: need at least two positive lags");
  if (opt.t_max < 10.0 * opt.t_min * (1.0 - 1e-12))
    throw std::invalid_argument("derivative_decay_probe: lag range spans less than one decade");

  const int d = params.d;
  const int dim = params.dim();
  out.lags.resize(opt.lags);
  out.values.resize(opt.lags);
  for (int k = 0; k < opt.lags; ++k)
    out.lags[k] = opt.t_min * std::pow(opt.t_max / opt.t_min, static_cast<double>(k) / (opt.lags - 1));

  parallel_for(static_cast<std::size_t>(opt.lags), [&](std::size_t k) {
    const double tau = out.lags[k];
    const Eigen::MatrixXd m = mat_exp(params, -tau).entries();
    const Eigen::MatrixXd cov =
        m * raw_covariance(params, profile, opt.s, opt.s + tau, opt.quad_nodes) * m.transpose();
    std::vector<double> half(params.n);
    for (int b = 0; b < params.n; ++b) {
      double v = 0.0;
      for (int c = 0; c < d; ++c) v = std::max(v, cov(b * d + c, b * d + c));
      half[b] = opt.box_sigmas * std::sqrt(v);
    }
    Grid g(params, half, std::vector<int>(params.n, opt.points));
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    const double norm = 1.0 / std::sqrt(std::pow(2.0 * std::numbers::pi, dim) * cov.determinant());
    GridField q = GridField::from_function(g, [&](std::span<const double> x) {
      Eigen::Map<const Eigen::VectorXd> v(x.data(), dim);
      return norm * std::exp(-0.5 * v.dot(prec * v));
    });
    // |(i xi)^beta| and the real symbol xi^beta differ by a constant phase, which |.| ignores
    std::vector<int> nyq(dim);
    for (int a = 0; a < dim; ++a) nyq[a] = g.nyquist_index(a);
    GridField spec = transform(q);
    std::vector<int> idx;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      g.unflatten(i, idx);
      double sym = 1.0;
      for (int b = 0; b < params.n; ++b) {
        const int axis = b * d;
        if (beta[b] % 2 == 1 && idx[axis] == nyq[axis]) sym = 0.0;
        sym *= std::pow(g.frequency(axis, idx[axis]), beta[b]);
      }
      if (alpha > 0.0) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const int axis = (j - 1) * d + c;
          r2 += std::pow(g.frequency(axis, idx[axis]), 2);
        }
        sym *= std::pow(r2, alpha / 2.0);
      }
      spec[i] *= sym;
    }
    out.values[k] = lp_norm(inverse_transform(spec), 1.0);
  });

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = opt.lags;
  for (int k = 0; k < opt.lags; ++k) {
    if (!(out.values[k] > 0.0)) throw std::runtime_error("derivative_decay_probe: non-positive norm");
    const double x = std::log(out.lags[k]), y = std::log(out.values[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - out.slope * sx) / n;
  double rss = 0.0;
  for (int k = 0; k < opt.lags; ++k) {
    const double r = std::log(out.values[k]) - icpt - out.slope * std::log(out.lags[k]);
    rss += r * r;
  }
  out.fit_rms = std::sqrt(rss / n);
  return out;
}

}  // namespace kolmo
