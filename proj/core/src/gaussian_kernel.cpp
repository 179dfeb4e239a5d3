#include "kolmo/gaussian_kernel.hpp"

#include "kolmo/quadrature.hpp"
#include "kolmo/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace kolmo {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

QuadratureRule unit_interval_rule(const DiffusionProfile& profile, double s, double t,
                                  int quad_nodes) {
  std::vector<double> cuts;
  const double len = t - s;
  if (profile.kind() == ProfileKind::piecewise_constant) {
    // a is evaluated at s + (t-s)(1-r); a breakpoint b sits at r = 1 - (b-s)/(t-s)
    for (double b : profile.breaks()) cuts.push_back(1.0 - (b - s) / len);
  } else if (profile.kind() == ProfileKind::smooth_periodic) {
    const int panels = std::max(1, static_cast<int>(std::ceil(len)));
    for (int k = 1; k < panels; ++k) cuts.push_back(static_cast<double>(k) / panels);
  }
  return composite_gauss_legendre(quad_nodes, 0.0, 1.0, cuts);
}

}  // namespace

Eigen::MatrixXd GaussianLaw::raw_cov() const {
  const Eigen::VectorXd f = dilation_factors(params, std::sqrt(t - s));
  return f.asDiagonal() * normalized_cov * f.asDiagonal();
}

Eigen::MatrixXd covariance(const ChainParams& params, const DiffusionProfile& profile, double s,
                           double t, int quad_nodes) {
  params.validate();
  if (!(s < t)) throw std::invalid_argument("covariance: requires s < t");
  if (quad_nodes < 2) throw std::invalid_argument("covariance: quad_nodes must be >= 2");
  if (profile.dim() != params.d) throw std::invalid_argument("covariance: profile dimension != d");
  const int n = params.n;
  const int d = params.d;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(params.dim(), params.dim());
  const QuadratureRule rule = unit_interval_rule(profile, s, t, quad_nodes);
  std::vector<double> c(n);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double r = rule.nodes[q];
    const Eigen::MatrixXd two_a = 2.0 * profile(s + (t - s) * (1.0 - r));
    // block i of e^{rA} applied to the last block: r^{n-i}/(n-i)!
    for (int i = 1; i <= n; ++i) c[i - 1] = std::pow(r, n - i) / factorial(n - i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        sigma.block(i * d, j * d, d, d) += rule.weights[q] * c[i] * c[j] * two_a;
  }
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd raw_covariance(const ChainParams& params, const DiffusionProfile& profile,
                               double s, double t, int quad_nodes) {
  GaussianLaw law{params, s, t, Eigen::VectorXd::Zero(params.dim()),
                  covariance(params, profile, s, t, quad_nodes)};
  return law.raw_cov();
}

GaussianLaw gaussian_law(const ChainParams& params, const DiffusionProfile& profile, double s,
                         double t, const Eigen::VectorXd& x, int quad_nodes) {
  if (x.size() != params.dim()) throw std::invalid_argument("gaussian_law: x has wrong size");
  return GaussianLaw{params, s, t, mat_exp(params, t - s) * x,
                     covariance(params, profile, s, t, quad_nodes)};
}

double density(const GaussianLaw& law, const Eigen::VectorXd& y) {
  const double len = law.t - law.s;
  if (!(len > 0.0)) throw std::invalid_argument("density: requires s < t");
  Eigen::LLT<Eigen::MatrixXd> llt(law.normalized_cov);
  if (llt.info() != Eigen::Success) throw std::domain_error("density: singular covariance");
  const Eigen::VectorXd z = dilation(law.params, 1.0 / std::sqrt(len), y - law.mean);
  const Eigen::MatrixXd lmat = llt.matrixL();
  const double logdet = 2.0 * lmat.diagonal().array().log().sum();
  if (!std::isfinite(logdet) || lmat.diagonal().minCoeff() <= 0.0)
    throw std::domain_error("density: singular covariance");
  const double quad = z.dot(llt.solve(z));
  const int dim = law.params.dim();
  const double log_norm = 0.5 * (dim * std::log(2.0 * std::numbers::pi) +
                                 law.params.homogeneous_dim() * std::log(len) + logdet);
  return std::exp(-0.5 * quad - log_norm);
}

std::vector<Eigen::VectorXd> sample_exact(const ChainParams& params,
                                          const DiffusionProfile& profile, double s, double t,
                                          const Eigen::VectorXd& x, int count,
                                          std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_exact: count must be >= 1");
  const GaussianLaw law = gaussian_law(params, profile, s, t, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(law.normalized_cov);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = dilation_factors(params, std::sqrt(t - s)).asDiagonal() *
                                 es.eigenvectors() * root.asDiagonal();
  const int dim = params.dim();
  std::vector<Eigen::VectorXd> out(count);
  Eigen::VectorXd g(dim);
  for (int k = 0; k < count; ++k) {
    Philox rng(seed, static_cast<std::uint64_t>(k));
    for (int i = 0; i < dim; ++i) g[i] = rng.normal();
    out[k] = law.mean + factor * g;
  }
  return out;
}

std::vector<Eigen::VectorXd> sample_euler(const ChainParams& params,
                                          const DiffusionProfile& profile, double s, double t,
                                          const Eigen::VectorXd& x, int steps, int count,
                                          std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("sample_euler: steps must be >= 1");
  if (count < 1) throw std::invalid_argument("sample_euler: count must be >= 1");
  if (x.size() != params.dim()) throw std::invalid_argument("sample_euler: x has wrong size");
  const int n = params.n;
  const int d = params.d;
  const double h = (t - s) / steps;
  const double sqrt_h = std::sqrt(h);
  std::vector<Eigen::MatrixXd> diff(profile.is_constant() ? 1 : steps);
  for (std::size_t k = 0; k < diff.size(); ++k)
    diff[k] = sqrt_h * symmetric_sqrt(2.0 * profile(s + h * static_cast<double>(k)));

  std::vector<Eigen::VectorXd> out(count);
  Eigen::VectorXd g(d);
  for (int m = 0; m < count; ++m) {
    Philox rng(seed, static_cast<std::uint64_t>(m));
    Eigen::VectorXd xs = x;
    for (int k = 0; k < steps; ++k) {
      // x_i += h x_{i+1}, in increasing i so the old x_{i+1} is used
      for (int i = 0; i + 1 < n; ++i) xs.segment(i * d, d) += h * xs.segment((i + 1) * d, d);
      for (int i = 0; i < d; ++i) g[i] = rng.normal();
      xs.segment((n - 1) * d, d) += diff[diff.size() == 1 ? 0 : k] * g;
    }
    out[m] = std::move(xs);
  }
  return out;
}

Eigen::MatrixXd moment_matrix(int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      m(i - 1, j - 1) = 1.0 / ((2.0 * n - i - j + 1.0) * factorial(n - i) * factorial(n - j));
  return m;
}

double c0_lower_bound(const ChainParams& params) {
  params.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment_matrix(params.n),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double gaussian_exp_derivative(const Eigen::MatrixXd& precision, const Eigen::VectorXd& y,
                               const std::vector<int>& gamma) {
  const int dim = static_cast<int>(y.size());
  if (static_cast<int>(gamma.size()) != dim)
    throw std::invalid_argument("gaussian_exp_derivative: multi-index has wrong size");
  const Eigen::VectorXd w = -(precision * y);
  std::map<std::vector<int>, double> memo;
  // F_{g + e_k} = w_k F_g - sum_l g_l P_kl F_{g - e_l}, with F_0 = 1
  auto rec = [&](auto&& self, const std::vector<int>& g) -> double {
    int k = -1;
    for (int i = 0; i < dim; ++i)
      if (g[i] > 0) {
        k = i;
        break;
      }
    if (k < 0) return 1.0;
    if (auto it = memo.find(g); it != memo.end()) return it->second;
    std::vector<int> base = g;
    --base[k];
    double v = w[k] * self(self, base);
    for (int l = 0; l < dim; ++l) {
      if (base[l] == 0) continue;
      std::vector<int> lower = base;
      --lower[l];
      v -= base[l] * precision(k, l) * self(self, lower);
    }
    memo.emplace(g, v);
    return v;
  };
  return rec(rec, gamma) * std::exp(-0.5 * y.dot(precision * y));
}

double density_derivative_norm(const ChainParams& params, const Eigen::MatrixXd& cov,
                               const std::vector<int>& beta, const Eigen::VectorXd& y) {
  if (static_cast<int>(beta.size()) != params.n)
    throw std::invalid_argument("density_derivative_norm: beta must have n entries");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::domain_error("density_derivative_norm: singular covariance");
  const int dim = params.dim();
  const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double norm_const = std::exp(-0.5 * (dim * std::log(2.0 * std::numbers::pi) + logdet));

  // every ordered choice of coordinates inside each block is one tensor entry
  std::vector<int> slots;
  for (int j = 0; j < params.n; ++j)
    for (int k = 0; k < beta[j]; ++k) slots.push_back(j);
  std::vector<int> choice(slots.size(), 0);
  double sum_sq = 0.0;
  std::map<std::vector<int>, double> cache;
  while (true) {
    std::vector<int> gamma(dim, 0);
    for (std::size_t m = 0; m < slots.size(); ++m) ++gamma[slots[m] * params.d + choice[m]];
    auto it = cache.find(gamma);
    if (it == cache.end()) it = cache.emplace(gamma, gaussian_exp_derivative(precision, y, gamma)).first;
    sum_sq += it->second * it->second;
    std::size_t m = 0;
    while (m < choice.size() && ++choice[m] == params.d) choice[m++] = 0;
    if (m == choice.size()) break;
  }
  return norm_const * std::sqrt(sum_sq);
}

KernelBoundFit kernel_bound_fit(const ChainParams& params, const DiffusionProfile& profile,
                                const std::vector<int>& beta, const KernelFitOptions& opt) {
  if (static_cast<int>(beta.size()) != params.n)
    throw std::invalid_argument("kernel_bound_fit: beta must have n entries");
  for (int b : beta)
    if (b < 0 || b > 2) throw std::invalid_argument("kernel_bound_fit: beta entries must be in [0, 2]");
  if (!(opt.t_min > 0.0 && opt.t_max >= opt.t_min))
    throw std::invalid_argument("kernel_bound_fit: invalid t range");
  const bool order_zero = std::all_of(beta.begin(), beta.end(), [](int b) { return b == 0; });
  const int dim = params.dim();

  struct Point {
    double zz;
    double q;
    double c_exact;
    double C_exact;
  };
  // In normalized coordinates z = Theta_{(t-s)^{-1/2}} y the rescaled derivative is exactly
  // the derivative of the N(0, Sigma) density in z.
  auto draw = [&](std::uint64_t seed) {
    std::vector<Point> pts(opt.samples);
    Philox rng(seed);
    for (auto& p : pts) {
      const double u = rng.uniform();
      const double t = opt.s + opt.t_min * std::pow(opt.t_max / opt.t_min, u);
      Eigen::VectorXd z(dim);
      for (int i = 0; i < dim; ++i) z[i] = opt.z_radius * (2.0 * rng.uniform() - 1.0);
      const Eigen::MatrixXd sigma = covariance(params, profile, opt.s, t, opt.quad_nodes);
      p.zz = z.squaredNorm();
      p.q = density_derivative_norm(params, sigma, beta, z);
      if (order_zero) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
        p.c_exact = 0.5 / es.eigenvalues().maxCoeff();
        p.C_exact = 1.0 / std::sqrt(std::pow(2.0 * std::numbers::pi, dim) * sigma.determinant());
      }
    }
    return pts;
  };

  const std::vector<Point> fit = draw(opt.seed);
  KernelBoundFit out;
  out.beta = beta;
  out.sample_size = opt.samples;
  double qmax = 0.0;
  for (const auto& p : fit) qmax = std::max(qmax, p.q);
  auto envelope = [&](double c) {
    double m = 0.0;
    for (const auto& p : fit) m = std::max(m, p.q * std::exp(c * p.zz));
    return m;
  };

  if (order_zero) {
    out.exact = true;
    out.c = std::numeric_limits<double>::infinity();
    for (const auto& p : fit) {
      out.c = std::min(out.c, p.c_exact);
      out.C = std::max(out.C, p.C_exact);
    }
  } else {
    const double cap = opt.cap_factor * qmax;
    double lo = 0.0, hi = 0.01;
    for (int k = 0; k < 60 && envelope(hi) <= cap; ++k) lo = hi, hi *= 2.0;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      (envelope(mid) <= cap ? lo : hi) = mid;
    }
    out.c = lo;
    out.C = envelope(lo);
  }

  auto violation = [&](const std::vector<Point>& pts, int* count) {
    double worst = 0.0;
    for (const auto& p : pts) {
      const double ratio = p.q / (out.C * std::exp(-out.c * p.zz)) - 1.0;
      if (ratio > 1e-12 && count) ++*count;
      worst = std::max(worst, ratio);
    }
    return worst;
  };
  out.max_relative_violation = violation(fit, nullptr);
  out.holdout_violation = violation(draw(opt.seed + 0x9e3779b97f4a7c15ULL), &out.holdout_violations);
  return out;
}

}  // namespace kolmo
