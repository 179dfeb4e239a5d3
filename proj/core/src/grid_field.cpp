#include "kolmo/grid_field.hpp"

#include "kolmo/random.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace kolmo {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_same_grid(const GridField& a, const GridField& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("GridField: grids differ");
  if (a.domain() != b.domain()) throw std::invalid_argument("GridField: domains differ");
}

// ---- FFTW plan cache ----

using PlanKey = std::tuple<std::vector<int>, int, int, int>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

  fftw_plan get(const std::vector<int>& dims, int first, int last, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    PlanKey key{dims, first, last, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const int rank = static_cast<int>(dims.size());
    std::vector<std::ptrdiff_t> stride(rank, 1);
    for (int a = rank - 2; a >= 0; --a) stride[a] = stride[a + 1] * dims[a + 1];
    std::size_t total = 1;
    for (int v : dims) total *= static_cast<std::size_t>(v);

    std::vector<fftw_iodim> tdims, hdims;
    for (int a = 0; a < rank; ++a) {
      fftw_iodim io{dims[a], static_cast<int>(stride[a]), static_cast<int>(stride[a])};
      (a >= first && a < last ? tdims : hdims).push_back(io);
    }
    auto* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_guru_dft(static_cast<int>(tdims.size()), tdims.data(),
                                     static_cast<int>(hdims.size()), hdims.data(), buf, buf,
                                     sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(std::move(key), p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<int> axis_dims(const Grid& g) {
  std::vector<int> dims(g.axes());
  for (int a = 0; a < g.axes(); ++a) dims[a] = g.axis_points(a);
  return dims;
}

// In-place unitary transform over axes [first, last).
void fft_axes(const Grid& g, std::vector<cplx>& v, int first, int last, int sign) {
  fftw_plan p = plan_cache().get(axis_dims(g), first, last, sign);
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(p, data, data);
  double count = 1.0;
  for (int a = first; a < last; ++a) count *= g.axis_points(a);
  const double scale = 1.0 / std::sqrt(count);
  for (auto& z : v) z *= scale;
}

// Iterates over every grid point, keeping the multi-index current.
template <class F>
void for_each_index(const Grid& g, F&& fn) {
  const int axes = g.axes();
  std::vector<int> idx(axes, 0);
  const std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, idx);
    for (int a = axes - 1; a >= 0; --a) {
      if (++idx[a] < g.axis_points(a)) break;
      idx[a] = 0;
    }
  }
}

int signed_mode(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

}  // namespace

// ---- Grid ----

Grid::Grid(const ChainParams& params, std::vector<double> half_lengths, std::vector<int> points)
    : params_(params), half_(std::move(half_lengths)), points_(std::move(points)) {
  init();
}

Grid::Grid(const ChainParams& params, double half_length, int points)
    : params_(params),
      half_(static_cast<std::size_t>(params.n), half_length),
      points_(static_cast<std::size_t>(params.n), points) {
  init();
}

void Grid::init() {
  params_.validate();
  require(static_cast<int>(half_.size()) == params_.n, "Grid: need one half-length per block");
  require(static_cast<int>(points_.size()) == params_.n, "Grid: need one point count per block");
  for (int j = 0; j < params_.n; ++j) {
    require(half_[j] > 0.0, "Grid: half-lengths must be positive");
    require(points_[j] >= 8 && points_[j] % 2 == 0, "Grid: point counts must be even and >= 8");
  }
  const int axes = params_.dim();
  stride_.assign(axes, 1);
  for (int a = axes - 2; a >= 0; --a)
    stride_[a] = stride_[a + 1] * static_cast<std::size_t>(axis_points(a + 1));
  size_ = stride_[0] * static_cast<std::size_t>(axis_points(0));
  cell_volume_ = 1.0;
  for (int a = 0; a < axes; ++a) cell_volume_ *= axis_spacing(a);
}

double Grid::frequency(int axis, int index) const {
  const int n = axis_points(axis);
  return kPi * signed_mode(index, n) / axis_half_length(axis);
}

void Grid::unflatten(std::size_t flat, std::vector<int>& idx) const {
  idx.resize(axes());
  for (int a = 0; a < axes(); ++a) {
    idx[a] = static_cast<int>(flat / stride_[a]);
    flat %= stride_[a];
  }
}

std::size_t Grid::flatten(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < axes(); ++a) flat += static_cast<std::size_t>(idx[a]) * stride_[a];
  return flat;
}

bool Grid::operator==(const Grid& o) const {
  return params_.n == o.params_.n && params_.d == o.params_.d && half_ == o.half_ &&
         points_ == o.points_;
}

// ---- GridField ----

GridField::GridField(Grid grid, Domain domain)
    : grid_(std::move(grid)), values_(grid_.size(), cplx{}), domain_(domain) {}

GridField::GridField(Grid grid, std::vector<cplx> values, Domain domain)
    : grid_(std::move(grid)), values_(std::move(values)), domain_(domain) {
  require(values_.size() == grid_.size(), "GridField: value count does not match grid");
}

GridField GridField::from_function(const Grid& grid,
                                   const std::function<double(std::span<const double>)>& fn) {
  GridField f(grid);
  std::vector<double> x(grid.axes());
  for_each_index(grid, [&](std::size_t flat, const std::vector<int>& idx) {
    for (int a = 0; a < grid.axes(); ++a) x[a] = grid.coordinate(a, idx[a]);
    f.values_[flat] = fn(x);
  });
  return f;
}

GridField GridField::constant(const Grid& grid, double value) {
  GridField f(grid);
  std::fill(f.values_.begin(), f.values_.end(), cplx(value, 0.0));
  return f;
}

std::vector<double> GridField::point(std::size_t flat) const {
  std::vector<int> idx;
  grid_.unflatten(flat, idx);
  std::vector<double> x(grid_.axes());
  for (int a = 0; a < grid_.axes(); ++a) x[a] = grid_.coordinate(a, idx[a]);
  return x;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (const auto& z : values_) m = std::max(m, std::abs(z));
  return m;
}

double GridField::max_imag() const {
  double m = 0.0;
  for (const auto& z : values_) m = std::max(m, std::abs(z.imag()));
  return m;
}

GridField GridField::real_part() const {
  GridField out(*this);
  for (auto& z : out.values_) z = cplx(z.real(), 0.0);
  return out;
}

GridField& GridField::operator+=(const GridField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridField& GridField::operator*=(double c) {
  for (auto& z : values_) z *= c;
  return *this;
}

GridField& GridField::axpy(double c, const GridField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * o.values_[i];
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double c, GridField a) { return a *= c; }

// ---- SpaceTimeField ----

SpaceTimeField::SpaceTimeField(double t0, double dt, std::vector<GridField> slices)
    : t0_(t0), dt_(dt), slices_(std::move(slices)) {
  require(!slices_.empty(), "SpaceTimeField: need at least one slice");
  require(dt_ > 0.0, "SpaceTimeField: dt must be positive");
  for (const auto& s : slices_)
    require(s.grid() == slices_.front().grid(), "SpaceTimeField: slices must share a grid");
}

GridField SpaceTimeField::at(double t) const {
  const double u = (t - t0_) / dt_;
  const double last = static_cast<double>(slices_.size() - 1);
  if (u < -1e-9 || u > last + 1e-9) return GridField(grid(), slices_.front().domain());
  const double uc = std::clamp(u, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(uc), slices_.size() - 1);
  const double w = uc - static_cast<double>(k);
  if (k + 1 >= slices_.size() || w < 1e-12) return slices_[k];
  GridField out = slices_[k];
  out *= 1.0 - w;
  out.axpy(w, slices_[k + 1]);
  return out;
}

// ---- transforms and multipliers ----

GridField transform(const GridField& f) {
  require(f.domain() == Domain::physical, "transform: field is not in the physical domain");
  GridField out(f.grid(), f.values(), Domain::frequency);
  fft_axes(f.grid(), out.values(), 0, f.grid().axes(), FFTW_FORWARD);
  return out;
}

GridField inverse_transform(const GridField& f) {
  require(f.domain() == Domain::frequency, "inverse_transform: field is not in the frequency domain");
  GridField out(f.grid(), f.values(), Domain::physical);
  fft_axes(f.grid(), out.values(), 0, f.grid().axes(), FFTW_BACKWARD);
  return out;
}

GridField apply_multiplier(const GridField& f,
                           const std::function<double(std::span<const double>)>& symbol) {
  const bool physical = f.domain() == Domain::physical;
  GridField spec = physical ? transform(f) : f;
  const Grid& g = spec.grid();
  std::vector<double> xi(g.axes());
  for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
    for (int a = 0; a < g.axes(); ++a) xi[a] = g.frequency(a, idx[a]);
    spec[flat] *= symbol(xi);
  });
  return physical ? inverse_transform(spec) : spec;
}

namespace {

double block_norm2(std::span<const double> xi, int block, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += xi[block * d + c] * xi[block * d + c];
  return s;
}

}  // namespace

GridField frac_laplacian(const GridField& f, int j, double alpha) {
  const int n = f.grid().blocks();
  const int d = f.grid().params().d;
  require(j >= 1 && j <= n, "frac_laplacian: block index out of range");
  require(alpha > 0.0, "frac_laplacian: alpha must be positive");
  return apply_multiplier(f, [=](std::span<const double> xi) {
    return -std::pow(block_norm2(xi, j - 1, d), alpha / 2.0);
  });
}

GridField block_power(const GridField& f, int j, double gamma) {
  const int n = f.grid().blocks();
  const int d = f.grid().params().d;
  require(j >= 1 && j <= n, "block_power: block index out of range");
  return apply_multiplier(f, [=](std::span<const double> xi) {
    const double s = block_norm2(xi, j - 1, d);
    return s == 0.0 ? 0.0 : std::pow(s, gamma);
  });
}

GridField spectral_derivative(const GridField& f, int axis, int order) {
  const Grid& g0 = f.grid();
  require(axis >= 0 && axis < g0.axes(), "spectral_derivative: axis out of range");
  require(order >= 0, "spectral_derivative: order must be >= 0");
  const bool physical = f.domain() == Domain::physical;
  GridField spec = physical ? transform(f) : f;
  const Grid& g = spec.grid();
  const int nyq = g.nyquist_index(axis);
  cplx unit(1.0, 0.0);
  for (int k = 0; k < order; ++k) unit *= cplx(0.0, 1.0);
  for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
    if (order % 2 == 1 && idx[axis] == nyq) {
      spec[flat] = 0.0;
      return;
    }
    spec[flat] *= unit * std::pow(g.frequency(axis, idx[axis]), order);
  });
  return physical ? inverse_transform(spec) : spec;
}

// ---- norms ----

double lp_norm(const GridField& f, double p) {
  require(f.domain() == Domain::physical, "lp_norm: field must be in the physical domain");
  require(p >= 1.0, "lp_norm: p must be >= 1");
  if (std::isinf(p)) return f.max_abs();
  double s = 0.0;
  for (const auto& z : f.values()) s += std::pow(std::abs(z), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const SpaceTimeField& f, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& s : f.slices()) m = std::max(m, lp_norm(s, p));
    return m;
  }
  double s = 0.0;
  for (const auto& slice : f.slices()) s += std::pow(lp_norm(slice, p), p);
  return std::pow(s * f.dt(), 1.0 / p);
}

double l2_norm_spectral(const GridField& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s += std::norm(z);
  return std::sqrt(s * f.grid().cell_volume());
}

double inner(const GridField& f, const GridField& g) {
  require_same_grid(f, g);
  require(f.domain() == Domain::physical, "inner: fields must be in the physical domain");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (std::conj(f[i]) * g[i]).real();
  return s * f.grid().cell_volume();
}

// ---- shear resampling ----

bool is_unit_block_upper(const BlockMatrix& m, double tol) {
  const int n = m.params().n;
  const int d = m.params().d;
  const Eigen::MatrixXd& e = m.entries();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      Eigen::MatrixXd target = Eigen::MatrixXd::Zero(d, d);
      if (i == j) target.setIdentity();
      if ((e.block(i * d, j * d, d, d) - target).cwiseAbs().maxCoeff() > tol) return false;
    }
  return true;
}

namespace {

// Block-by-block Fourier translation; with `transpose` the steps run in reverse order with
// conjugated phases, which is the exact L^2 transpose of the forward map.
GridField shear_spectral(const GridField& f, const BlockMatrix& m, bool transpose) {
  const Grid& g = f.grid();
  const int n = g.blocks();
  const int d = g.params().d;
  const int axes = g.axes();
  const Eigen::MatrixXd& e = m.entries();
  GridField out = f;
  std::vector<double> x(axes);
  for (int step = 0; step < n - 1; ++step) {
    const int b = transpose ? step : n - 2 - step;
    fft_axes(g, out.values(), b * d, (b + 1) * d, FFTW_FORWARD);
    for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
      for (int a = (b + 1) * d; a < axes; ++a) x[a] = g.coordinate(a, idx[a]);
      cplx phase(1.0, 0.0);
      for (int c = 0; c < d; ++c) {
        const int a = b * d + c;
        double shift = 0.0;
        for (int k = (b + 1) * d; k < axes; ++k) shift += e(a, k) * x[k];
        const double arg = (transpose ? -1.0 : 1.0) * g.frequency(a, idx[a]) * shift;
        phase *= idx[a] == g.nyquist_index(a) ? cplx(std::cos(arg), 0.0) : std::polar(1.0, arg);
      }
      out[flat] *= phase;
    });
    fft_axes(g, out.values(), b * d, (b + 1) * d, FFTW_BACKWARD);
  }
  return out;
}

GridField shear_spline(const GridField& f, const BlockMatrix& m) {
  const Grid& g = f.grid();
  const int axes = g.axes();
  // interpolating coefficients: divide the spectrum by the sampled B-spline symbol
  GridField coef = apply_multiplier(f, [&](std::span<const double> xi) {
    double s = 1.0;
    for (int a = 0; a < axes; ++a) s *= (2.0 + std::cos(xi[a] * g.axis_spacing(a))) / 3.0;
    return 1.0 / s;
  });
  const Eigen::MatrixXd& e = m.entries();
  GridField out(g);
  std::vector<double> x(axes);
  std::vector<std::array<double, 4>> w(axes);
  std::vector<std::array<std::size_t, 4>> off(axes);
  std::size_t terms = 1;
  for (int a = 0; a < axes; ++a) terms *= 4;
  std::vector<int> ctr(axes);
  for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
    for (int a = 0; a < axes; ++a) x[a] = g.coordinate(a, idx[a]);
    for (int a = 0; a < axes; ++a) {
      double y = 0.0;
      for (int k = 0; k < axes; ++k) y += e(a, k) * x[k];
      const double u = (y + g.axis_half_length(a)) / g.axis_spacing(a);
      const double fl = std::floor(u);
      const double t = u - fl;
      const double t2 = t * t, t3 = t2 * t;
      w[a] = {(1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
              (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0};
      const long np = g.axis_points(a);
      const long base = static_cast<long>(fl) - 1;
      for (int q = 0; q < 4; ++q) {
        long i = (base + q) % np;
        if (i < 0) i += np;
        off[a][q] = static_cast<std::size_t>(i) * g.axis_stride(a);
      }
    }
    std::fill(ctr.begin(), ctr.end(), 0);
    cplx acc{};
    for (std::size_t t = 0; t < terms; ++t) {
      double wt = 1.0;
      std::size_t src = 0;
      for (int a = 0; a < axes; ++a) {
        wt *= w[a][ctr[a]];
        src += off[a][ctr[a]];
      }
      acc += wt * coef[src];
      for (int a = axes - 1; a >= 0; --a) {
        if (++ctr[a] < 4) break;
        ctr[a] = 0;
      }
    }
    out[flat] = acc;
  });
  return out;
}

}  // namespace

GridField shear_resample(const GridField& f, const BlockMatrix& m, ShearMethod method) {
  require(f.domain() == Domain::physical, "shear_resample: field must be in the physical domain");
  require(m.params().n == f.grid().blocks() && m.params().d == f.grid().params().d,
          "shear_resample: matrix does not match grid");
  if (method == ShearMethod::automatic)
    method = is_unit_block_upper(m) ? ShearMethod::spectral_translation : ShearMethod::cubic_spline;
  if (method == ShearMethod::spectral_translation) {
    require(is_unit_block_upper(m), "shear_resample: spectral path needs a unit block upper triangular matrix");
    return shear_spectral(f, m, false);
  }
  return shear_spline(f, m);
}

GridField shear_transpose(const GridField& f, const BlockMatrix& m) {
  require(f.domain() == Domain::physical, "shear_transpose: field must be in the physical domain");
  require(is_unit_block_upper(m), "shear_transpose: needs a unit block upper triangular matrix");
  return shear_spectral(f, m, true);
}

// ---- random fields ----

GridField random_bandlimited(const Grid& grid, std::uint64_t seed,
                             const std::vector<double>& cutoffs, double decay) {
  require(static_cast<int>(cutoffs.size()) == grid.blocks(), "random_bandlimited: need one cutoff per block");
  for (double c : cutoffs)
    require(c > 0.0 && c <= 0.5, "random_bandlimited: cutoff must lie in (0, 1/2]");
  const int axes = grid.axes();
  GridField raw(grid, Domain::frequency);
  for_each_index(grid, [&](std::size_t flat, const std::vector<int>& idx) {
    double xi2 = 0.0;
    // stream keyed by the signed mode, so a finer grid on the same box redraws the shared modes
    std::uint64_t stream = 0x6a09e667f3bcc909ULL;
    for (int a = 0; a < axes; ++a) {
      const int np = grid.axis_points(a);
      const int km = signed_mode(idx[a], np);
      if (std::abs(static_cast<double>(km)) / np > cutoffs[grid.block_of_axis(a)]) return;
      const double xi = grid.frequency(a, idx[a]);
      xi2 += xi * xi;
      stream = (stream ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(km))) * 0x100000001b3ULL;
    }
    Philox rng(seed, stream);
    const double re = rng.normal();
    const double im = rng.normal();
    raw[flat] = std::pow(1.0 + xi2, -decay / 2.0) * cplx(re, im);
  });
  // Hermitian symmetrization so the physical field is real
  GridField spec(grid, Domain::frequency);
  std::vector<int> neg(axes);
  for_each_index(grid, [&](std::size_t flat, const std::vector<int>& idx) {
    for (int a = 0; a < axes; ++a) {
      const int np = grid.axis_points(a);
      neg[a] = (np - idx[a]) % np;
    }
    spec[flat] = 0.5 * (raw[flat] + std::conj(raw[grid.flatten(neg)]));
  });
  return inverse_transform(spec).real_part();
}

GridField random_bandlimited(const Grid& grid, std::uint64_t seed, double cutoff, double decay) {
  return random_bandlimited(grid, seed, std::vector<double>(grid.blocks(), cutoff), decay);
}

GridField gaussian_window(const GridField& f, const std::vector<double>& widths) {
  const Grid& g = f.grid();
  require(f.domain() == Domain::physical, "gaussian_window: field must be in the physical domain");
  require(static_cast<int>(widths.size()) == g.blocks(), "gaussian_window: need one width per block");
  GridField out = f;
  for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
    double e = 0.0;
    for (int a = 0; a < g.axes(); ++a) {
      const double x = g.coordinate(a, idx[a]);
      const double w = widths[g.block_of_axis(a)];
      e += x * x / (2.0 * w * w);
    }
    out[flat] *= std::exp(-e);
  });
  return out;
}

// ---- export ----

static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");

void write_binary(const GridField& f, const std::filesystem::path& path) {
  require(f.domain() == Domain::physical, "write_binary: field must be in the physical domain");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_binary: cannot open " + path.string());
  const Grid& g = f.grid();
  std::vector<double> buf;
  buf.push_back(g.blocks());
  buf.push_back(g.params().d);
  for (int j = 0; j < g.blocks(); ++j) buf.push_back(g.points(j));
  for (int j = 0; j < g.blocks(); ++j) buf.push_back(g.half_length(j));
  for (const auto& z : f.values()) buf.push_back(z.real());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_binary: write failed for " + path.string());
}

GridField read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_binary: cannot open " + path.string());
  auto next = [&]() {
    double v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
      throw std::runtime_error("read_binary: truncated file " + path.string());
    return v;
  };
  const int n = static_cast<int>(next());
  const int d = static_cast<int>(next());
  ChainParams params(n, d, 1.0);
  std::vector<int> pts(n);
  std::vector<double> half(n);
  for (auto& p : pts) p = static_cast<int>(next());
  for (auto& h : half) h = next();
  Grid g(params, half, pts);
  GridField f(g);
  for (auto& z : f.values()) z = next();
  return f;
}

void write_csv(const GridField& f, const std::filesystem::path& path) {
  require(f.domain() == Domain::physical, "write_csv: field must be in the physical domain");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  const Grid& g = f.grid();
  for (int a = 0; a < g.axes(); ++a) out << "x" << (a + 1) << ',';
  out << "value\n";
  out.precision(17);
  for_each_index(g, [&](std::size_t flat, const std::vector<int>& idx) {
    for (int a = 0; a < g.axes(); ++a) out << g.coordinate(a, idx[a]) << ',';
    out << f[flat].real() << '\n';
  });
}

}  // namespace kolmo
