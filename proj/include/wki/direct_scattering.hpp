#pragma once

#include <span>
#include <vector>

#include "wki/lax.hpp"

namespace wki {

enum class JostSide { Plus, Minus };  // normalized at +infinity / -infinity

enum class Interpolation { Linear, Cubic };

struct PropagationOptions {
  /// Each Magnus step keeps lambda^2 |M| h^3 below this bound.
  double local_error_bound = 1e-9;
  /// Total step cap per propagation; exceeding it is resolution-exceeded.
  long max_steps = 50'000'000;
  /// Fixed number of substeps per grid interval (0 = choose from the bound).
  int forced_substeps = 0;
  /// q between grid samples: linear, or four-point Lagrange (fourth order).
  Interpolation interpolation = Interpolation::Cubic;
};

struct JostSolution {
  double lambda = 0.0;
  JostSide side = JostSide::Plus;
  std::vector<Mat2> psi;  // one 2x2 sample per grid point
  long steps = 0;
};

/// Midpoint-Magnus propagation of psi' = (i lambda sigma_3 - lambda M) psi from
/// the normalization end, with psi = exp(i lambda sigma_3 x) at that end.
/// q between grid samples follows PropagationOptions::interpolation.
JostSolution propagate_jost(const Potential& p, double lambda, JostSide side,
                            const PropagationOptions& opts = {});

/// Exact exponential of h (i lambda sigma_3 - lambda M(q)).
Mat2 magnus_step(cplx q, double lambda, double h);

struct TransitionMatrix {
  double lambda = 0.0;
  cplx a, b, c, d;
  Mat2 T;  // [[a, d], [b, c]], psi_+ = psi_- T
  double symmetry_defect = 0.0;   // |d + conj(b)| + |c - conj(a)|
  double unitarity_defect = 0.0;  // | |a|^2 + |b|^2 - 1 |
  double det_defect = 0.0;        // max |det psi_+- - 1| at x = 0
};

/// Wronskians at x = 0 of the two Jost solutions.
TransitionMatrix transition_matrix(const Potential& p, double lambda,
                                   const PropagationOptions& opts = {});

/// b from the limit integral b = -lambda int e^{2 i lambda y} conj(q) m^(+)_11 dy,
/// used to cross-check sign conventions against the Wronskian route.
cplx b_from_limit_formula(const Potential& p, double lambda, const PropagationOptions& opts = {});

struct ScatteringOptions {
  PropagationOptions propagation;
  double min_abs_a = 0.5;
  std::vector<double> diagnostic_lambdas;  // optional uniform lambda grid dump
  /// Zeros of a in the upper half plane are counted by the winding of
  /// a(lambda) exp(i lambda int H) over [-lambda_max, lambda_max] (0 = 1/z_min).
  bool winding_check = true;
  double winding_lambda_max = 0.0;
  double winding_step = 0.02;
};

struct ScatteringData {
  SpectralGrid zgrid;
  CVec r;      // on zgrid, zero for |z| < z_min
  double t = 0.0;
  // Diagnostic lambda samples (a, b at real lambda).
  RVec lambdas;
  CVec a;
  CVec b;
  double max_unitarity_defect = 0.0;
  double max_symmetry_defect = 0.0;
  double max_det_defect = 0.0;
  double min_abs_a = 1.0;
  double outer_truncation = 0.0;  // |r| at the z grid ends
  double inner_truncation = 0.0;  // |r| at the innermost carried points near z_min
  double winding = 0.0;           // argument-principle count of zeros of a
};

/// Winding number of a(lambda) exp(i lambda int H) over a uniform lambda grid.
double a_winding(const Potential& p, double lambda_max, double step, const PropagationOptions& opts = {});

ScatteringData reflection_coefficient(const Potential& p, const SpectralGrid& zgrid,
                                      const ScatteringOptions& opts = {});

/// r(z, t) = r(z) exp(4 i t / z^2).
ScatteringData evolve_reflection(const ScatteringData& sd, double t);

struct AsymptoticDefect {
  double lambda;
  double defect;  // | a(lambda) exp(i lambda int H) - exp(-int B) |
};

std::vector<AsymptoticDefect> check_a_asymptotics(const Potential& p, std::span<const double> lambdas,
                                                  const PropagationOptions& opts = {});

}  // namespace wki
