#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>

#include "wki/errors.hpp"
#include "wki/types.hpp"

namespace wki {

/// Uniform periodic-style grid x_k = -L + k * (2L/N), k = 0..N-1.
class SpatialGrid {
 public:
  SpatialGrid(double half_width, int point_count);

  double half_width() const { return half_width_; }
  int size() const { return n_; }
  double spacing() const { return 2.0 * half_width_ / n_; }
  double point(int k) const { return -half_width_ + k * spacing(); }
  RVec points() const;
  /// Index of x = 0 (N is even, so it lies on the grid).
  int center_index() const { return n_ / 2; }

 private:
  double half_width_;
  int n_;
};

SpatialGrid make_spatial_grid(double half_width, int point_count);

/// Uniform grid on [-Z, Z) in the z variable. Reflection data is forced to
/// zero for |z| < z_min; C+- are computed on a zero-padded copy of length
/// padding * N_z.
class SpectralGrid {
 public:
  SpectralGrid(double half_width, int point_count, double z_min, int padding = 4);

  double half_width() const { return half_width_; }
  int size() const { return n_; }
  double z_min() const { return z_min_; }
  int padding() const { return padding_; }
  double spacing() const { return 2.0 * half_width_ / n_; }
  double point(int k) const { return -half_width_ + k * spacing(); }
  RVec points() const;
  /// True where reflection data is carried (z_min <= |z|).
  bool is_active(int k) const;

 private:
  double half_width_;
  int n_;
  double z_min_;
  int padding_;
};

template <class Grid>
struct GridFunction {
  Grid grid;
  CVec values;

  GridFunction(Grid g, CVec v) : grid(std::move(g)), values(std::move(v)) {
    require(static_cast<int>(values.size()) == grid.size(),
            "grid function sample count does not match grid");
    for (const auto& s : values)
      require(std::isfinite(s.real()) && std::isfinite(s.imag()),
              "grid function sample is not finite");
  }
};

using SpatialFunction = GridFunction<SpatialGrid>;
using SpectralFunction = GridFunction<SpectralGrid>;

/// Left-anchored cumulative trapezoid: out[0] = 0, out[k] ~ int_{x_0}^{x_k} f.
CVec cumulative_integral(std::span<const cplx> f, double h);
RVec cumulative_integral(std::span<const double> f, double h);
SpatialFunction cumulative_integral(const SpatialFunction& f);

double trapezoid(std::span<const double> f, double h);
cplx trapezoid(std::span<const cplx> f, double h);

/// Owning wrapper around an FFTW plan pair of fixed length.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const { return n_; }
  /// Unnormalized forward transform (sign -1), in place.
  void forward(CVec& data) const;
  /// Inverse transform including the 1/n factor, in place.
  void backward(CVec& data) const;

 private:
  int n_;
  void* fwd_;
  void* bwd_;
};

/// Angular wavenumbers matching the FFT ordering for a periodic grid of
/// length n and spacing h.
RVec fft_wavenumbers(int n, double h);

/// Spectral derivative of a periodic sample vector.
CVec spectral_derivative(std::span<const cplx> f, double h, int order = 1);

/// Discrete Cauchy boundary projections on a SpectralGrid.
///
/// Samples are zero-padded to padding * N_z points, transformed, multiplied
/// by the indicator of positive frequencies (1/2 at zero and at Nyquist),
/// transformed back, and truncated. C- is formed as C+ f - f, so the
/// Plemelj identity C+ - C- = I holds exactly on the grid.
///
/// Sign convention: 1/(s + i) is a + boundary value (C+ f = f), 1/(s - i)
/// is a - boundary value (C- f = -f).
///
/// The multiplier is the Toeplitz kernel 1/2 at lag 0, (i/M) cot(pi d/M) at
/// odd lags d and 0 at even lags (M the padded length): the alternating-point
/// rule for the Cauchy integral on a line of period M dz. CauchyKernel::Line
/// swaps cot(pi d/M) for its line limit M/(pi d), removing the O(1/P^2)
/// periodization error at the same cost (the projection is then no longer
/// exactly idempotent).
enum class CauchyKernel { Periodic, Line };

class CauchyProjector {
 public:
  explicit CauchyProjector(const SpectralGrid& grid, CauchyKernel kernel = CauchyKernel::Periodic);

  const SpectralGrid& grid() const { return grid_; }
  CauchyKernel kind() const { return kind_; }
  /// Toeplitz entry of C+ at lag d = p - q, |d| < N_z.
  cplx kernel(int d) const;

  CVec plus(std::span<const cplx> f) const;
  CVec minus(std::span<const cplx> f) const;

  /// Largest |f| among the first and last `count` samples.
  static double edge_level(std::span<const cplx> f, int count = 1);

 private:
  SpectralGrid grid_;
  CauchyKernel kind_;
  std::shared_ptr<Fft> fft_;
  std::shared_ptr<const CVec> multiplier_;  // transformed kernel
};

SpectralFunction cauchy_plus(const SpectralFunction& f);
SpectralFunction cauchy_minus(const SpectralFunction& f);

}  // namespace wki
