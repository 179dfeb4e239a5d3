#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace kolmo {

/// Block structure of the chain: n blocks of dimension d, ellipticity kappa.
struct ChainParams {
  int n = 2;
  int d = 1;
  double kappa = 1.0;

  ChainParams() = default;
  ChainParams(int n_, int d_, double kappa_);

  int dim() const { return n * d; }
  /// Homogeneous degree of block j (1-based): 2(n-j)+1.
  int block_degree(int j) const { return 2 * (n - j) + 1; }
  /// Sum of block degrees times d, i.e. n^2 d.
  int homogeneous_dim() const { return n * n * d; }

  void validate() const;
};

bool operator==(const ChainParams& a, const ChainParams& b);

/// Square (n d) x (n d) matrix with d x d block structure.
class BlockMatrix {
 public:
  BlockMatrix(const ChainParams& params, Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const { return m_; }
  const ChainParams& params() const { return params_; }

  /// Block (i, j), 1-based.
  Eigen::MatrixXd block(int i, int j) const;

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return m_ * x; }
  BlockMatrix operator*(const BlockMatrix& other) const;

 private:
  ChainParams params_;
  Eigen::MatrixXd m_;
};

BlockMatrix shear_matrix(const ChainParams& params);

/// Closed form of e^{tA}: block (i,j) = t^{j-i}/(j-i)! I for j >= i.
BlockMatrix mat_exp(const ChainParams& params, double t);

/// Anisotropic dilation: block j scaled by r^{2(n-j)+1}.
Eigen::VectorXd dilation(const ChainParams& params, double r, const Eigen::VectorXd& x);

/// Diagonal of the dilation matrix, length n d.
Eigen::VectorXd dilation_factors(const ChainParams& params, double r);

/// Symmetric square root of a symmetric positive definite matrix.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a);

/// Embeds sqrt(2a) into the bottom-right d x d block of an (n d) x (n d) zero matrix.
BlockMatrix sigma_embed(const ChainParams& params, const Eigen::MatrixXd& a);

enum class ProfileKind { constant, piecewise_constant, smooth_periodic };

std::string to_string(ProfileKind kind);

/// Time-dependent diffusion coefficient t -> a_t (symmetric d x d).
class DiffusionProfile {
 public:
  static DiffusionProfile constant(const Eigen::MatrixXd& a);
  static DiffusionProfile constant(int d, double a);
  /// Piecewise constant: values[k] on [breaks[k-1], breaks[k]), values[0] before breaks[0].
  static DiffusionProfile piecewise_constant(std::vector<double> breaks,
                                             std::vector<Eigen::MatrixXd> values);
  /// ((kappa + 1/kappa)/2 + (kappa - 1/kappa)/2 sin t) I.
  static DiffusionProfile smooth_periodic(int d, double kappa);
  /// s -> a(scale s + shift); breakpoints are mapped along.
  static DiffusionProfile time_changed(const DiffusionProfile& a, double scale, double shift);

  Eigen::MatrixXd operator()(double t) const { return eval_(t); }
  ProfileKind kind() const { return kind_; }
  int dim() const { return d_; }
  /// Breakpoints of a piecewise-constant profile (empty otherwise).
  const std::vector<double>& breaks() const { return breaks_; }
  /// True if the profile does not depend on t.
  bool is_constant() const { return kind_ == ProfileKind::constant; }

 private:
  DiffusionProfile(ProfileKind kind, int d, std::function<Eigen::MatrixXd(double)> eval,
                   std::vector<double> breaks = {});

  ProfileKind kind_;
  int d_;
  std::function<Eigen::MatrixXd(double)> eval_;
  std::vector<double> breaks_;
};

struct EllipticityReport {
  double min_eigenvalue;
  double max_eigenvalue;
  double max_asymmetry;
  bool ok;
};

/// Evaluates the profile on samples in [t0, t1] and checks kappa^{-1} <= a_t <= kappa.
EllipticityReport check_ellipticity(const DiffusionProfile& profile, double kappa, double t0,
                                    double t1, int samples, double eps = 1e-10);

}  // namespace kolmo
