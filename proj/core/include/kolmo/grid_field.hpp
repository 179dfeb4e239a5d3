#pragma once

#include "kolmo/chain_model.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace kolmo {

using cplx = std::complex<double>;

/// Periodic tensor grid on prod_j [-L_j, L_j)^d. Block j (0-based here) has d axes of
/// points[j] samples each. Values are stored row-major with axis 0 (block 1, first
/// coordinate) slowest.
class Grid {
 public:
  Grid(const ChainParams& params, std::vector<double> half_lengths, std::vector<int> points);
  /// Same half-length and point count for every block.
  Grid(const ChainParams& params, double half_length, int points);

  const ChainParams& params() const { return params_; }
  int blocks() const { return params_.n; }
  int axes() const { return params_.dim(); }
  int block_of_axis(int axis) const { return axis / params_.d; }

  double half_length(int block) const { return half_[block]; }
  int points(int block) const { return points_[block]; }
  const std::vector<double>& half_lengths() const { return half_; }
  const std::vector<int>& block_points() const { return points_; }
  double spacing(int block) const { return 2.0 * half_[block] / points_[block]; }

  int axis_points(int axis) const { return points_[block_of_axis(axis)]; }
  double axis_spacing(int axis) const { return spacing(block_of_axis(axis)); }
  double axis_half_length(int axis) const { return half_[block_of_axis(axis)]; }
  std::size_t axis_stride(int axis) const { return stride_[axis]; }

  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return cell_volume_ * static_cast<double>(size_); }

  double coordinate(int axis, int index) const {
    return -axis_half_length(axis) + index * axis_spacing(axis);
  }
  /// Angular frequency of FFT-ordered index on an axis.
  double frequency(int axis, int index) const;
  /// Index of the Nyquist mode on an axis.
  int nyquist_index(int axis) const { return axis_points(axis) / 2; }

  /// Per-axis indices of a flat index.
  void unflatten(std::size_t flat, std::vector<int>& idx) const;
  std::size_t flatten(std::span<const int> idx) const;

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  void init();

  ChainParams params_;
  std::vector<double> half_;
  std::vector<int> points_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

enum class Domain { physical, frequency };

/// Complex samples of a function on a Grid, tagged with the domain they live in.
class GridField {
 public:
  GridField(Grid grid, Domain domain = Domain::physical);
  GridField(Grid grid, std::vector<cplx> values, Domain domain);

  /// Samples x -> fn(x) on the grid (physical domain).
  static GridField from_function(const Grid& grid,
                                 const std::function<double(std::span<const double>)>& fn);
  static GridField constant(const Grid& grid, double value);

  const Grid& grid() const { return grid_; }
  Domain domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  /// Physical coordinates of a flat index.
  std::vector<double> point(std::size_t flat) const;

  double max_abs() const;
  double max_imag() const;
  /// Drops imaginary parts.
  GridField real_part() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double c);
  /// this += c * o
  GridField& axpy(double c, const GridField& o);

 private:
  Grid grid_;
  std::vector<cplx> values_;
  Domain domain_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double c, GridField a);

/// Uniformly sampled stack of fields on one grid: slice k lives at time t0 + k dt.
class SpaceTimeField {
 public:
  SpaceTimeField(double t0, double dt, std::vector<GridField> slices);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double time(std::size_t k) const { return t0_ + dt_ * static_cast<double>(k); }
  double horizon() const { return time(slices_.size() - 1); }
  std::size_t steps() const { return slices_.size(); }
  const Grid& grid() const { return slices_.front().grid(); }

  GridField& operator[](std::size_t k) { return slices_[k]; }
  const GridField& operator[](std::size_t k) const { return slices_[k]; }
  std::vector<GridField>& slices() { return slices_; }
  const std::vector<GridField>& slices() const { return slices_; }

  /// Slice at time t, linear interpolation between samples; zero outside the window.
  GridField at(double t) const;

 private:
  double t0_;
  double dt_;
  std::vector<GridField> slices_;
};

/// Unitary discrete Fourier transform (sum |f|^2 = sum |f^|^2).
GridField transform(const GridField& f);
GridField inverse_transform(const GridField& f);

/// Multiplies the spectrum by symbol(xi); xi is the angular frequency vector of length n d.
/// Returns a field in the same domain as the input.
GridField apply_multiplier(const GridField& f,
                           const std::function<double(std::span<const double>)>& symbol);

/// Fractional Laplacian in block j (1-based): symbol -|xi_j|^alpha.
GridField frac_laplacian(const GridField& f, int j, double alpha);

/// Symbol |xi_j|^{2 gamma}, the Fourier side of (-Delta_{x_j})^gamma; used for norms.
GridField block_power(const GridField& f, int j, double gamma);

/// Partial derivative along one axis (1 per unit of order), spectral; Nyquist mode dropped.
GridField spectral_derivative(const GridField& f, int axis, int order = 1);

/// Riemann-sum L^p norm of a physical field, p in [1, inf] (p = inf is the max).
double lp_norm(const GridField& f, double p);
/// Space-time L^p norm (cell volume times dt).
double lp_norm(const SpaceTimeField& f, double p);
/// L^2 norm of a frequency-domain field with the same weighting as its physical pair.
double l2_norm_spectral(const GridField& f);

/// Real L^2 inner product of two physical fields on the same grid.
double inner(const GridField& f, const GridField& g);

enum class ShearMethod {
  automatic,            // spectral translation when M is unit block upper triangular
  cubic_spline,         // periodic cubic B-spline interpolation
  spectral_translation  // exact block-wise Fourier translation
};

/// x -> f(M x) with periodic wrap.
GridField shear_resample(const GridField& f, const BlockMatrix& m,
                         ShearMethod method = ShearMethod::automatic);

/// Exact discrete L^2 transpose of the spectral-translation shear by M; approximates
/// x -> f(M^{-1} x).
GridField shear_transpose(const GridField& f, const BlockMatrix& m);

/// True if M has identity diagonal blocks and vanishing blocks below the diagonal.
bool is_unit_block_upper(const BlockMatrix& m, double tol = 1e-14);

/// Real random field with independent Gaussian Fourier coefficients of amplitude
/// (1 + |xi|^2)^{-decay/2} on modes whose normalized index |k|/N is at most `cutoff`
/// on every axis (cutoff in (0, 1/2]). The zero mode is always kept. Each coefficient depends
/// only on the seed and its signed mode, so grids on the same box agree on shared modes.
GridField random_bandlimited(const Grid& grid, std::uint64_t seed, double cutoff,
                             double decay = 0.0);
/// Per-block cutoffs.
GridField random_bandlimited(const Grid& grid, std::uint64_t seed,
                             const std::vector<double>& cutoffs, double decay = 0.0);

/// Multiplies by exp(-sum_j |x_j|^2 / (2 w_j^2)).
GridField gaussian_window(const GridField& f, const std::vector<double>& widths);

/// Flat binary snapshot: little-endian float64 header [n, d, N_1..N_n, L_1..L_n] followed by
/// the real parts of the physical values in storage order.
void write_binary(const GridField& f, const std::filesystem::path& path);
GridField read_binary(const std::filesystem::path& path);
/// CSV with one row per point: x_1, ..., x_{nd}, value.
void write_csv(const GridField& f, const std::filesystem::path& path);

}  // namespace kolmo
