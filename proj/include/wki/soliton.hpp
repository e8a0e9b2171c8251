#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "wki/lattice.hpp"

namespace wki {

/// One-soliton parameters, lambda_1 = xi + i eta, with |beta| / |z_1 - conj(z_1)| = 1
/// and arg beta = 0.
struct SolitonParams {
  double xi = 3.0;
  double eta = 1.0;

  SolitonParams() = default;
  SolitonParams(double xi, double eta);

  double K() const { return xi * xi + eta * eta; }
  double alpha() const;  // tan(alpha) = eta / xi
  bool bursting() const;
  double eps_max() const { return 2.0 * eta / K(); }
};

/// * = 2 eta x_H - 8 xi eta t.
double soliton_star(double x_h, double t, const SolitonParams& p);

/// Root of eps = (eta/K) (tanh(2 eta (x - 4 xi t + eps)) + 1), bisection then Newton.
double soliton_epsilon(double x, double t, const SolitonParams& p);

struct AtSingularity {
  double star;
  double x_h;
};

struct SolitonSample {
  double x, t, eps, x_h, star;
  std::variant<cplx, AtSingularity> q;
};

SolitonSample soliton_sample(double x, double t, const SolitonParams& p);
std::variant<cplx, AtSingularity> soliton_q(double x, double t, const SolitonParams& p);

/// q_H as a function of x_H (no hodograph step).
std::variant<cplx, AtSingularity> soliton_qh(double x_h, double t, const SolitonParams& p);

/// |q_H|^2 = (4 eta^2/K) (cosh^2 * - eta^2/K) / (cosh^2 * - 2 eta^2/K)^2.
double soliton_amplitude_sq(double star, const SolitonParams& p);

/// (m1_12, m1_11) at (x_H, t).
std::pair<cplx, cplx> soliton_m1_entries(double x_h, double t, const SolitonParams& p);

/// d m1_12 / d x_H = (2 eta / K) e^{-i phi} sech(*) (eta tanh(*) - i xi).
cplx soliton_dm12(double x_h, double t, const SolitonParams& p);

/// x at which the phase takes the value `star` at time t.
double soliton_x_from_star(double star, double t, const SolitonParams& p);

struct ResidualLevel {
  double h;
  double max_residual;
};

struct ResidualReport {
  std::vector<ResidualLevel> levels;
  std::vector<double> ratios;  // residual(h) / residual(h / 2)
};

/// i q_t + (q/<q>)_xx by second-order centred differences (dt = dt_ratio * h)
/// at the points of `grid`, for `levels` successive halvings of grid.spacing().
ResidualReport soliton_pde_residual(const SolitonParams& p, const SpatialGrid& grid, double t,
                                    int levels = 4, double dt_ratio = 0.1);

/// Samples of soliton_q on a grid; throws range-error at a singularity.
CVec soliton_profile(const SpatialGrid& grid, double t, const SolitonParams& p);

}  // namespace wki
