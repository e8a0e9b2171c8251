#pragma once

#include <string>
#include <vector>

#include "wki/direct_scattering.hpp"
#include "wki/rhp.hpp"

namespace wki {

/// q_H from the slope s = q_H / <q_H>. Throws slope-condition-violated when
/// |s| >= 1 - margin.
cplx qh_from_slope(cplx s, double margin = 1e-6);

/// Monotone cubic (pchip) interpolant of real samples on strictly increasing
/// nodes; zero outside the node range.
class MonotoneCubic {
 public:
  MonotoneCubic(RVec nodes, RVec values);
  double operator()(double x) const;
  double front() const { return lo_; }
  double back() const { return hi_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double lo_, hi_;
};

struct FixedPointOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

struct FixedPointResult {
  RVec eps;  // on the x grid
  int iterations = 0;
  double last_change = 0.0;
};

/// eps(x) = int_{-inf}^x (<q_H(y + eps(y))> - 1) dy by Picard iteration with
/// monotone cubic interpolation of <q_H> - 1 over the x_H samples.
FixedPointResult epsilon_fixed_point(std::span<const double> x_h, std::span<const cplx> q_h,
                                     const SpatialGrid& xgrid, const FixedPointOptions& opts = {});

/// x = x_H - (1/i) m1_11 per sample. Throws hodograph-inconsistent if the
/// map is not strictly increasing or m1_11 is not (nonnegative) imaginary
/// within `tolerance`.
RVec x_from_m11(std::span<const double> x_h, std::span<const cplx> m11, double tolerance = 1e-8);

struct Resampled {
  CVec q;
  double interpolation_error = 0.0;  // from dropping every other x_H sample
};

/// q(x) = q_H(x + eps(x)). Points mapped outside the x_H range are zero if q_H
/// has decayed below `decay_tolerance` at that end, else range-error.
Resampled resample_q(std::span<const double> x_h, std::span<const cplx> q_h, std::span<const double> eps,
                     const SpatialGrid& xgrid, double decay_tolerance = 1e-6);

enum class FactorizationPolicy { Auto, TriangularOnly, DeltaConjugatedOnly };

struct InverseOptions {
  RhpOptions rhp{.first_row_only = true};
  FactorizationPolicy factorization = FactorizationPolicy::Auto;
  double slope_margin = 1e-6;
  FixedPointOptions fixed_point;
  double imaginary_tolerance = 1e-8;
  int threads = 0;
};

struct CellLog {
  double x_h;
  double t;
  FactorizationKind kind;
  SolverKind solver;
  int iterations;
  int d_iterations;
  double residual;
  double d_residual;
  double abs_slope;
};

struct ReconstructionResult {
  SpatialGrid xgrid;
  double t = 0.0;
  RVec x_h;
  CVec m11, m12, slope, q_h;
  RVec x_of_xh;       // explicit route
  RVec eps;           // fixed-point route, on the x grid
  RVec eps_explicit;  // explicit route resampled to the x grid
  CVec q;             // on the x grid
  std::vector<CellLog> cells;

  double max_slope = 0.0;
  double eps_monotonicity_defect = 0.0;  // largest decrease of eps along x
  double route_gap = 0.0;                // sup |eps - eps_explicit|
  double map_slope_min = 0.0;            // discrete dx/dx_H
  double map_slope_max = 0.0;
  double x_c = 0.0;                      // x at x_H = 0
  double eps_infinity = 0.0;
  double mass_qh = 0.0;                  // int (1 - 1/<q_H>) dx_H = E1
  double mass_from_r = 0.0;              // (1 / 2 pi) int log(1 + |r|^2)
  double interpolation_error = 0.0;
  double max_residual = 0.0;
  int fixed_point_iterations = 0;
};

/// Full inverse map at time t from scattering data (r known at sd.t).
ReconstructionResult inverse_transform(const ScatteringData& sd, double t, const SpatialGrid& xgrid,
                                       const InverseOptions& opts = {});

}  // namespace wki
