#include "kolmo/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kolmo {

ChainParams::ChainParams(int n_, int d_, double kappa_) : n(n_), d(d_), kappa(kappa_) {
  validate();
}

void ChainParams::validate() const {
  if (n < 2) throw std::invalid_argument("ChainParams: n must be >= 2");
  if (d < 1) throw std::invalid_argument("ChainParams: d must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("ChainParams: kappa must be >= 1");
}

bool operator==(const ChainParams& a, const ChainParams& b) {
  return a.n == b.n && a.d == b.d && a.kappa == b.kappa;
}

BlockMatrix::BlockMatrix(const ChainParams& params, Eigen::MatrixXd entries)
    : params_(params), m_(std::move(entries)) {
  if (m_.rows() != params_.dim() || m_.cols() != params_.dim())
    throw std::invalid_argument("BlockMatrix: size does not match n*d");
}

Eigen::MatrixXd BlockMatrix::block(int i, int j) const {
  const int d = params_.d;
  return m_.block((i - 1) * d, (j - 1) * d, d, d);
}

BlockMatrix BlockMatrix::operator*(const BlockMatrix& other) const {
  return BlockMatrix(params_, m_ * other.m_);
}

BlockMatrix shear_matrix(const ChainParams& params) {
  params.validate();
  const int d = params.d;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(params.dim(), params.dim());
  for (int i = 0; i + 1 < params.n; ++i)
    a.block(i * d, (i + 1) * d, d, d) = Eigen::MatrixXd::Identity(d, d);
  return BlockMatrix(params, std::move(a));
}

BlockMatrix mat_exp(const ChainParams& params, double t) {
  params.validate();
  const int d = params.d;
  const int n = params.n;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(params.dim(), params.dim());
  // coefficient t^k / k! for the k-th superdiagonal
  std::vector<double> coef(n, 1.0);
  for (int k = 1; k < n; ++k) coef[k] = coef[k - 1] * t / k;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      e.block(i * d, j * d, d, d) = coef[j - i] * Eigen::MatrixXd::Identity(d, d);
  return BlockMatrix(params, std::move(e));
}

Eigen::VectorXd dilation_factors(const ChainParams& params, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("dilation: r must be > 0");
  Eigen::VectorXd f(params.dim());
  for (int j = 1; j <= params.n; ++j)
    f.segment((j - 1) * params.d, params.d).setConstant(std::pow(r, params.block_degree(j)));
  return f;
}

Eigen::VectorXd dilation(const ChainParams& params, double r, const Eigen::VectorXd& x) {
  if (x.size() != params.dim()) throw std::invalid_argument("dilation: point has wrong size");
  return dilation_factors(params, r).cwiseProduct(x);
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a) {
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("symmetric_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-12) throw std::invalid_argument("symmetric_sqrt: matrix is not positive definite");
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

BlockMatrix sigma_embed(const ChainParams& params, const Eigen::MatrixXd& a) {
  params.validate();
  if (a.rows() != params.d || a.cols() != params.d)
    throw std::invalid_argument("sigma_embed: a must be d x d");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(params.dim(), params.dim());
  const int off = (params.n - 1) * params.d;
  s.block(off, off, params.d, params.d) = symmetric_sqrt(2.0 * a);
  return BlockMatrix(params, std::move(s));
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::piecewise_constant: return "piecewise-constant";
    case ProfileKind::smooth_periodic: return "smooth-periodic";
  }
  return "unknown";
}

DiffusionProfile::DiffusionProfile(ProfileKind kind, int d,
                                   std::function<Eigen::MatrixXd(double)> eval,
                                   std::vector<double> breaks)
    : kind_(kind), d_(d), eval_(std::move(eval)), breaks_(std::move(breaks)) {}

DiffusionProfile DiffusionProfile::constant(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DiffusionProfile: a must be square");
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  return DiffusionProfile(ProfileKind::constant, static_cast<int>(a.rows()),
                          [sym](double) { return sym; });
}

DiffusionProfile DiffusionProfile::constant(int d, double a) {
  return constant(a * Eigen::MatrixXd::Identity(d, d));
}

DiffusionProfile DiffusionProfile::piecewise_constant(std::vector<double> breaks,
                                                      std::vector<Eigen::MatrixXd> values) {
  if (values.size() != breaks.size() + 1)
    throw std::invalid_argument("piecewise_constant: need breaks.size() + 1 values");
  if (!std::is_sorted(breaks.begin(), breaks.end()))
    throw std::invalid_argument("piecewise_constant: breakpoints must be sorted");
  const int d = static_cast<int>(values.front().rows());
  for (auto& v : values) {
    if (v.rows() != d || v.cols() != d)
      throw std::invalid_argument("piecewise_constant: inconsistent block sizes");
    v = 0.5 * (v + v.transpose());
  }
  auto eval = [breaks, values](double t) {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    return values[static_cast<std::size_t>(it - breaks.begin())];
  };
  return DiffusionProfile(ProfileKind::piecewise_constant, d, eval, breaks);
}

DiffusionProfile DiffusionProfile::smooth_periodic(int d, double kappa) {
  const double mid = 0.5 * (kappa + 1.0 / kappa);
  const double amp = 0.5 * (kappa - 1.0 / kappa);
  return DiffusionProfile(ProfileKind::smooth_periodic, d, [=](double t) {
    return Eigen::MatrixXd((mid + amp * std::sin(t)) * Eigen::MatrixXd::Identity(d, d));
  });
}

DiffusionProfile DiffusionProfile::time_changed(const DiffusionProfile& a, double scale,
                                                double shift) {
  if (!(scale > 0.0)) throw std::invalid_argument("time_changed: scale must be positive");
  std::vector<double> breaks;
  for (double b : a.breaks_) breaks.push_back((b - shift) / scale);
  auto eval = a.eval_;
  return DiffusionProfile(a.kind_, a.d_, [eval, scale, shift](double s) { return eval(scale * s + shift); },
                          breaks);
}

EllipticityReport check_ellipticity(const DiffusionProfile& profile, double kappa, double t0,
                                    double t1, int samples, double eps) {
  EllipticityReport rep{std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(), 0.0, true};
  for (int k = 0; k < samples; ++k) {
    const double t = samples == 1 ? t0 : t0 + (t1 - t0) * k / (samples - 1);
    const Eigen::MatrixXd a = profile(t);
    rep.max_asymmetry = std::max(rep.max_asymmetry, (a - a.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()),
                                                      Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
    rep.max_eigenvalue = std::max(rep.max_eigenvalue, es.eigenvalues().maxCoeff());
  }
  rep.ok = rep.min_eigenvalue >= 1.0 / kappa - eps && rep.max_eigenvalue <= kappa + eps &&
           rep.max_asymmetry <= eps;
  return rep;
}

}  // namespace kolmo
