#include "wki/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

namespace wki {

namespace {

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(CVec& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

constexpr double kDecayWarning = 1e-6;

}  // namespace

SpatialGrid::SpatialGrid(double half_width, int point_count)
    : half_width_(half_width), n_(point_count) {
  require(std::isfinite(half_width) && half_width > 0.0, "spatial grid half width must be positive");
  require(point_count >= 4 && point_count % 2 == 0, "spatial grid point count must be even and >= 4");
}

RVec SpatialGrid::points() const {
  RVec x(n_);
  for (int k = 0; k < n_; ++k) x[k] = point(k);
  return x;
}

SpatialGrid make_spatial_grid(double half_width, int point_count) {
  return SpatialGrid(half_width, point_count);
}

SpectralGrid::SpectralGrid(double half_width, int point_count, double z_min, int padding)
    : half_width_(half_width), n_(point_count), z_min_(z_min), padding_(padding) {
  require(std::isfinite(half_width) && half_width > 0.0, "spectral grid half width must be positive");
  require(is_power_of_two(point_count) && point_count >= 4,
          "spectral grid point count must be a power of two");
  require(z_min >= 0.0 && z_min < half_width, "z_min must lie in [0, Z)");
  require(padding >= 2, "padding factor must be >= 2");
  require(is_power_of_two(static_cast<long>(padding) * point_count),
          "padded spectral length must be a power of two");
}

RVec SpectralGrid::points() const {
  RVec z(n_);
  for (int k = 0; k < n_; ++k) z[k] = point(k);
  return z;
}

bool SpectralGrid::is_active(int k) const {
  const double z = point(k);
  return z != 0.0 && std::abs(z) >= z_min_;
}

CVec cumulative_integral(std::span<const cplx> f, double h) {
  CVec out(f.size(), cplx{});
  for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return out;
}

RVec cumulative_integral(std::span<const double> f, double h) {
  RVec out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return out;
}

SpatialFunction cumulative_integral(const SpatialFunction& f) {
  return SpatialFunction(f.grid, cumulative_integral(std::span<const cplx>(f.values), f.grid.spacing()));
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
  return s * h;
}

cplx trapezoid(std::span<const cplx> f, double h) {
  if (f.size() < 2) return {};
  cplx s = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
  return s * h;
}

Fft::Fft(int n) : n_(n) {
  require(n > 0, "FFT length must be positive");
  CVec scratch(n);
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_dft_1d(n, as_fftw(scratch), as_fftw(scratch), FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(n, as_fftw(scratch), as_fftw(scratch), FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fwd_ || !bwd_) fail(ErrorKind::InternalError, "FFTW planning failed");
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(CVec& data) const {
  require(static_cast<int>(data.size()) == n_, "FFT buffer has wrong length");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(data), as_fftw(data));
}

void Fft::backward(CVec& data) const {
  require(static_cast<int>(data.size()) == n_, "FFT buffer has wrong length");
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(data), as_fftw(data));
  const double scale = 1.0 / n_;
  for (auto& v : data) v *= scale;
}

RVec fft_wavenumbers(int n, double h) {
  RVec k(n);
  const double base = 2.0 * kPi / (n * h);
  for (int j = 0; j < n; ++j) k[j] = base * (j <= n / 2 ? j : j - n);
  // The Nyquist mode has no sign; zero it so odd derivatives stay real-symmetric.
  if (n % 2 == 0) k[n / 2] = 0.0;
  return k;
}

CVec spectral_derivative(std::span<const cplx> f, double h, int order) {
  const int n = static_cast<int>(f.size());
  Fft fft(n);
  CVec data(f.begin(), f.end());
  fft.forward(data);
  RVec k = fft_wavenumbers(n, h);
  if (order % 2 == 0 && n % 2 == 0) k[n / 2] = kPi / h;
  for (int j = 0; j < n; ++j) data[j] *= std::pow(kI * k[j], order);
  fft.backward(data);
  return data;
}

CauchyProjector::CauchyProjector(const SpectralGrid& grid, CauchyKernel kernel)
    : grid_(grid), kind_(kernel), fft_(std::make_shared<Fft>(grid.padding() * grid.size())) {
  const int m = fft_->size();
  CVec mult(m, cplx{});
  if (kernel == CauchyKernel::Periodic) {
    std::fill(mult.begin(), mult.begin() + m / 2, cplx{1.0});
    mult[0] = mult[m / 2] = 0.5;
  } else {
    // Lags beyond N_z never meet zero-padded input, so the circular product is exact.
    const int n = grid.size();
    for (int d = 1 - n; d < n; ++d) mult[(d + m) % m] = this->kernel(d);
    fft_->forward(mult);
  }
  multiplier_ = std::make_shared<const CVec>(std::move(mult));
}

cplx CauchyProjector::kernel(int d) const {
  if (d == 0) return 0.5;
  if (d % 2 == 0) return cplx{};
  const int m = grid_.padding() * grid_.size();
  return kind_ == CauchyKernel::Periodic ? kI / (m * std::tan(kPi * d / m)) : kI / (kPi * d);
}

CVec CauchyProjector::plus(std::span<const cplx> f) const {
  const int n = grid_.size();
  const int m = fft_->size();
  require(static_cast<int>(f.size()) == n, "Cauchy projector input has wrong length");
  CVec buf(m, cplx{});
  std::copy(f.begin(), f.end(), buf.begin());
  fft_->forward(buf);
  const CVec& mult = *multiplier_;
  for (int j = 0; j < m; ++j) buf[j] *= mult[j];
  fft_->backward(buf);
  buf.resize(n);
  return buf;
}

CVec CauchyProjector::minus(std::span<const cplx> f) const {
  CVec out = plus(f);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= f[k];
  return out;
}

double CauchyProjector::edge_level(std::span<const cplx> f, int count) {
  double level = 0.0;
  const int n = static_cast<int>(f.size());
  for (int k = 0; k < std::min(count, n); ++k)
    level = std::max({level, std::abs(f[k]), std::abs(f[n - 1 - k])});
  return level;
}

namespace {

void warn_if_not_decayed(const SpectralFunction& f) {
  const double level = CauchyProjector::edge_level(f.values);
  if (level > kDecayWarning)
    std::clog << "warning: Cauchy projection input not decayed at grid ends (|f| = " << level
              << ")\n";
}

}  // namespace

SpectralFunction cauchy_plus(const SpectralFunction& f) {
  warn_if_not_decayed(f);
  return SpectralFunction(f.grid, CauchyProjector(f.grid).plus(f.values));
}

SpectralFunction cauchy_minus(const SpectralFunction& f) {
  warn_if_not_decayed(f);
  return SpectralFunction(f.grid, CauchyProjector(f.grid).minus(f.values));
}

}  // namespace wki
