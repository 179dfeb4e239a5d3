#pragma once

#include "kolmo/chain_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace kolmo {

/// Law of X^{s,x}_t: mean e^{(t-s)A} x and covariance D Sigma D, where Sigma is
/// the normalized covariance and D the dilation by (t-s)^{1/2}.
struct GaussianLaw {
  ChainParams params;
  double s = 0.0;
  double t = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd normalized_cov;

  Eigen::MatrixXd raw_cov() const;
};

constexpr int kDefaultQuadNodes = 64;

/// Normalized covariance of the rescaled process started at zero, integrated on [0, 1]
/// by composite Gauss-Legendre with panels aligned to profile breakpoints.
Eigen::MatrixXd covariance(const ChainParams& params, const DiffusionProfile& profile, double s,
                           double t, int quad_nodes = kDefaultQuadNodes);

/// Un-normalized covariance of X^{s,0}_t.
Eigen::MatrixXd raw_covariance(const ChainParams& params, const DiffusionProfile& profile,
                               double s, double t, int quad_nodes = kDefaultQuadNodes);

GaussianLaw gaussian_law(const ChainParams& params, const DiffusionProfile& profile, double s,
                         double t, const Eigen::VectorXd& x, int quad_nodes = kDefaultQuadNodes);

/// Transition density p_{s,t}(x, y) evaluated through the normalized quadratic form.
double density(const GaussianLaw& law, const Eigen::VectorXd& y);

/// I.i.d. draws from the exact law. Sample k uses the RNG stream (seed, k), so the
/// output does not depend on how work is split.
std::vector<Eigen::VectorXd> sample_exact(const ChainParams& params,
                                          const DiffusionProfile& profile, double s, double t,
                                          const Eigen::VectorXd& x, int count,
                                          std::uint64_t seed);

/// Euler-Maruyama endpoints of dX = AX dt + sigma_t dW on [s, t].
std::vector<Eigen::VectorXd> sample_euler(const ChainParams& params,
                                          const DiffusionProfile& profile, double s, double t,
                                          const Eigen::VectorXd& x, int steps, int count,
                                          std::uint64_t seed);

/// n x n moment matrix M_ij = 1 / ((2n-i-j+1) (n-i)! (n-j)!).
Eigen::MatrixXd moment_matrix(int n);

/// Infimum over the unit sphere of the polynomial moment form; equals min eig of moment_matrix.
double c0_lower_bound(const ChainParams& params);

/// Partial derivative d^gamma of exp(-y^T P y / 2) at y (gamma indexes all n d coordinates),
/// by the multivariate Hermite recursion.
double gaussian_exp_derivative(const Eigen::MatrixXd& precision, const Eigen::VectorXd& y,
                               const std::vector<int>& gamma);

/// Frobenius norm of the block derivative tensor grad^{beta_1}_{y_1} ... grad^{beta_n}_{y_n}
/// of the centered Gaussian density with covariance `cov`.
double density_derivative_norm(const ChainParams& params, const Eigen::MatrixXd& cov,
                               const std::vector<int>& beta, const Eigen::VectorXd& y);

struct KernelBoundFit {
  std::vector<int> beta;
  double C = 0.0;
  double c = 0.0;
  int sample_size = 0;
  /// Worst q / (C exp(-c |z|^2)) - 1 over the fitting sample (clamped at 0).
  double max_relative_violation = 0.0;
  /// Same, over an independent held-out sample.
  double holdout_violation = 0.0;
  int holdout_violations = 0;
  bool exact = false;  // constants from closed-form Gaussian algebra rather than a fit
};

struct KernelFitOptions {
  double s = 0.0;
  double t_min = 0.05;
  double t_max = 2.0;
  int samples = 10000;
  double z_radius = 4.0;     // normalized points drawn from [-z_radius, z_radius]^{nd}
  double cap_factor = 2.0;   // fitted C may exceed the sample peak by at most this factor
  std::uint64_t seed = 1;
  int quad_nodes = kDefaultQuadNodes;
};

/// Fits the Gaussian-type bound |grad^beta p^{(0)}_{s,t}(y)| <= C (t-s)^{-e/2} exp(-c |Theta y|^2).
KernelBoundFit kernel_bound_fit(const ChainParams& params, const DiffusionProfile& profile,
                                const std::vector<int>& beta, const KernelFitOptions& opt = {});

}  // namespace kolmo
