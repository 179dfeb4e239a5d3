#pragma once

#include "kolmo/chain_model.hpp"
#include "kolmo/gaussian_kernel.hpp"
#include "kolmo/grid_field.hpp"

#include <stdexcept>
#include <vector>

namespace kolmo {

/// Forward evolution from time s to time t >= s.
struct SemigroupSpec {
  ChainParams params;
  DiffusionProfile profile;
  double s = 0.0;
  double t = 0.0;
  int quad_nodes = kDefaultQuadNodes;
};

/// T_{s,t} f(x) = E f(e^{(t-s)A} x + X^{s,0}_t): Gaussian convolution in frequency space,
/// then one shear.
GridField apply_semigroup(const SemigroupSpec& spec, const GridField& f);

/// L^2 transpose of apply_semigroup: shear back by e^{(s-t)A}, then the same convolution.
GridField apply_adjoint(const SemigroupSpec& spec, const GridField& f);

/// Gaussian part only (no shear), with covariance `cov`.
GridField gaussian_convolve(const GridField& f, const Eigen::MatrixXd& cov);

struct ResolventSpec {
  ChainParams params;
  DiffusionProfile profile;
  double lambda = 1.0;
  /// Quadrature horizon T_max; <= 0 means "to the end of the sampled window".
  double horizon = 0.0;
  /// Allowed tail bound relative to the space-time L^2 norm of f.
  double tail_tolerance = 1e-6;
  int quad_nodes = kDefaultQuadNodes;
};

/// Thrown when the quadrature horizon cannot meet the requested tail tolerance.
class HorizonError : public std::runtime_error {
 public:
  HorizonError(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

struct ResolventResult {
  GridField u;
  /// Upper bound for the L^2 norm of the neglected part of the time integral.
  double tail_bound = 0.0;
  double horizon = 0.0;
  int slices = 0;
};

/// u(s) = int_0^T e^{-lambda t} T_{s,t+s} f(t+s) dt by the trapezoid rule on f's time samples.
/// f is taken to vanish outside its sampled window; s must lie on f's time grid or before it.
ResolventResult resolvent(const ResolventSpec& spec, const SpaceTimeField& f, double s);

/// u on every slice s_k = s_begin + k dt up to the end of f's window, via the backward recursion
/// u(s) = dt/2 f(s) + e^{-lambda dt} T_{s,s+dt}[u(s+dt) + dt/2 f(s+dt)], which equals the
/// trapezoid rule of `resolvent` at every slice. (f.t0 - s_begin) / dt must be an integer >= 0.
SpaceTimeField resolvent_all(const ResolventSpec& spec, const SpaceTimeField& f, double s_begin);

/// Diffusion-free problem d_s u + Ax.grad u - lambda u + f = 0:
/// u(s, x) = int_0^T e^{-lambda t} f(t+s, e^{tA} x) dt.
ResolventResult transport_solve(const ChainParams& params, double lambda, const SpaceTimeField& f,
                                double s, double tail_tolerance = 1e-6);
SpaceTimeField transport_all(const ChainParams& params, double lambda, const SpaceTimeField& f,
                             double s_begin);

/// L_s u = tr(a_s grad^2_{x_n} u) + sum_j x_{j+1} . grad_{x_j} u, spectral derivatives.
GridField generator_apply(const ChainParams& params, const Eigen::MatrixXd& a, const GridField& u);
/// Drift part only: A x . grad u.
GridField drift_apply(const ChainParams& params, const GridField& u);

/// || (T_{s+h,t} f - T_{s-h,t} f) / 2h + L_s T_{s,t} f ||_2 / ||f||_2.
double generator_residual(const SemigroupSpec& spec, const GridField& f, double h_s = 1e-3);

/// Space-time residual of d_s u + (L_s - lambda) u + f = 0 on interior slices (centered
/// differences in s, a frozen at each slice), relative to ||f||_2 over the same slices.
/// With `diffusion` false only the drift is used (transport equation).
double resolvent_residual(const ChainParams& params, const DiffusionProfile& profile, double lambda,
                          const SpaceTimeField& u, const SpaceTimeField& f, bool diffusion = true);

struct DecayProbeResult {
  std::vector<double> lags;    // t - s
  std::vector<double> values;  // sup_{|f| <= 1} || Delta^{alpha/2}_{x_j} grad^beta T_{s,t} f ||_inf
  double slope = 0.0;
  double predicted = 0.0;
  double fit_rms = 0.0;
};

struct DecayProbeOptions {
  double s = 0.0;
  double t_min = 0.01;
  double t_max = 1.0;
  int lags = 9;
  int points = 64;        // grid points per axis
  double box_sigmas = 10.0;
  int quad_nodes = kDefaultQuadNodes;
};

/// Predicted exponent -(sum_i (2(n-i)+1) beta_i + (2(n-j)+1) alpha) / 2.
double predicted_decay_exponent(const ChainParams& params, int j, double alpha,
                                const std::vector<int>& beta);

/// Measures how the operator norm L^inf -> L^inf of Delta^{alpha/2}_{x_j} grad^beta T_{s,t}
/// scales with t - s and fits the log-log slope. The norm equals the L^1 norm of that derivative
/// of the centered Gaussian with covariance e^{-(t-s)A} C e^{-(t-s)A*}, evaluated spectrally on a
/// grid adapted to the covariance. beta_i derivatives act on the first coordinate of block i.
DecayProbeResult derivative_decay_probe(const ChainParams& params, const DiffusionProfile& profile,
                                        int j, double alpha, const std::vector<int>& beta,
                                        const DecayProbeOptions& opt = {});

}  // namespace kolmo
