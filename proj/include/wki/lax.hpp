#pragma once

#include <span>

#include "wki/lattice.hpp"

namespace wki {

enum class DerivativeMethod { Spectral, CenteredDifference };

/// Sampled potential q on a spatial grid together with q_x and size
/// diagnostics. The weighted norms approximate the X_1 norm
/// ||<x> q||_2 + ||<x> q_x||_2 that controls the small-data regime.
struct Potential {
  SpatialGrid grid;
  CVec q;
  CVec qx;
  DerivativeMethod derivative_method = DerivativeMethod::Spectral;
  double sup_norm = 0.0;
  double weighted_l2 = 0.0;     // ||<x> q||
  double weighted_l2_dx = 0.0;  // ||<x> q_x||

  double x1_norm() const { return weighted_l2 + weighted_l2_dx; }
};

Potential make_potential(const SpatialGrid& grid, CVec q,
                         DerivativeMethod method = DerivativeMethod::Spectral);

/// Eigenvector matrix diagonalizing -i lambda sigma_3 + lambda M; det = 1.
Mat2 eigvec_matrix(cplx q);

/// Gauge data of the AKNS reformulation, sampled on the potential's grid.
struct AknsFields {
  CVec Q;
  CVec B;     // purely imaginary
  RVec H;     // <q> - 1 >= 0
  RVec p;     // x + int_{-inf}^x H, normalized at the left end
  std::vector<Mat2> G;

  /// int_R B and int_R H over the truncated line.
  cplx integral_B() const;
  double integral_H() const;

  /// Diagonal entries of g_{x0} = exp(-sigma_3 int_{x0}^x B); `from_left`
  /// selects x0 = -infinity, otherwise x0 = +infinity.
  std::vector<std::pair<cplx, cplx>> gauge(bool from_left) const;

  double spacing = 0.0;
};

AknsFields akns_potentials(const Potential& p);

double conserved_E1(const Potential& p);

struct E2Options {
  double guard = 1e-8;              // |q| at or below this is excluded
  double max_excluded_fraction = 0.95;
};

struct E2Result {
  cplx value;
  cplx gradient_term;  // 1/2 (|q|^2)_x / (1 + |q|^2)
  cplx ratio_term;     // (q_x / q) (1 - <q>) / <q>
  double excluded_fraction = 0.0;
};

/// Guarded diagnostic: the q_x / q term is singular at zeros of q.
E2Result conserved_E2(const Potential& p, const E2Options& opts = {});

}  // namespace wki
