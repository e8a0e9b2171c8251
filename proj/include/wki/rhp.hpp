#pragma once

#include <array>
#include <optional>

#include "wki/lattice.hpp"

namespace wki {

/// 2x2 matrix-valued samples on the z grid, entries in row-major order
/// (00, 01, 10, 11).
using MatField = std::array<CVec, 4>;

MatField zero_field(int n);
MatField identity_field(int n);

enum class FactorizationKind { Triangular, DeltaConjugated };
enum class SolverKind { Neumann, Dense };
enum class SolverPolicy { Auto, NeumannOnly, DenseOnly };

const char* to_string(FactorizationKind kind);
const char* to_string(SolverKind kind);

/// theta = x_H / z + 2 t / z^2.
double phase(double z, double x_h, double t);

struct DeltaFunction {
  CVec plus;   // delta_+ = exp(C+ log(1 + |r|^2))
  CVec minus;  // delta_- = exp(C- log(1 + |r|^2))
  CVec Delta;  // 1 / (delta_+ delta_-)
  /// (1 / 2 pi i) int log(1 + |r|^2) ds over the grid.
  cplx kappa;
};

DeltaFunction delta_function(const SpectralFunction& r, CauchyKernel kernel = CauchyKernel::Line);
DeltaFunction delta_function(const CauchyProjector& proj, std::span<const cplx> r);

/// Large-|z| model c(lambda) ~ sum_k c[k-1] lambda^k, k = 1..4 (lambda = -1/z),
/// of one off-diagonal jump coefficient. Interpolates the samples at the two
/// grid ends and at |z| ~ 3Z/4, so the tail |lambda| < 1/Z lies inside the
/// node range.
struct TailModel {
  std::array<cplx, 4> c{};
};

struct JumpFactorization {
  FactorizationKind kind = FactorizationKind::Triangular;
  SpectralGrid zgrid;
  double x_h = 0.0;
  double t = 0.0;
  RVec theta;  // zero where r is not carried
  MatField w_plus, w_minus;
  MatField dw_plus, dw_minus;
  // DeltaConjugated only.
  std::optional<DeltaFunction> delta;
  CVec rho;
  // Tail models for the (1,2) coefficient (multiplying exp(-2 i theta)) and
  // the (2,1) coefficient (multiplying exp(2 i theta)).
  TailModel tail12, tail21;
  // Cauchy transform of the tail jump at the grid points, entries (1,2) and
  // (2,1): the part of mu driven by |z| > Z to first order, and its x_H derivative.
  MatField tail_source, tail_dsource;
};

/// w_+- for the chosen factorization. `r` is the reflection coefficient at
/// time zero; the time dependence enters through theta. A precomputed delta
/// may be passed for the DeltaConjugated kind (it does not depend on x_H, t).
JumpFactorization build_factorization(const SpectralFunction& r, double x_h, double t,
                                      FactorizationKind kind,
                                      const DeltaFunction* delta = nullptr);

struct RhpOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  int dense_cap = 1024;
  SolverPolicy policy = SolverPolicy::Auto;
  /// Solve only the first row of mu (enough for m1_11, m1_12).
  bool first_row_only = false;
  /// Add the |z| > Z contribution: to the right-hand side of the solve and
  /// to the moments.
  bool tail_correction = true;
  /// Cauchy kernel of the projections (Line drops the periodization error).
  CauchyKernel cauchy_kernel = CauchyKernel::Line;
};

struct RhpSolution {
  MatField mu;
  MatField dmu;
  Mat2 m1 = Mat2::Zero();
  Mat2 dx_m1 = Mat2::Zero();
  double residual = 0.0;
  double d_residual = 0.0;
  int iterations = 0;
  int d_iterations = 0;
  SolverKind solver = SolverKind::Neumann;
  bool first_row_only = false;
};

/// Beals-Coifman solver sharing one Cauchy projector across solves.
class RhpSolver {
 public:
  explicit RhpSolver(const SpectralGrid& zgrid, RhpOptions opts = {});

  const RhpOptions& options() const { return opts_; }
  const CauchyProjector& projector() const { return proj_; }

  /// mu = I + C+(mu w-) + C-(mu w+).
  RhpSolution solve_mu(const JumpFactorization& f) const;
  /// (I - C_w) dmu = C+(mu dw-) + C-(mu dw+).
  void solve_dmu(const JumpFactorization& f, RhpSolution& sol) const;
  /// solve_mu, solve_dmu and both moments.
  RhpSolution solve(const JumpFactorization& f) const;

  /// C_w applied to a matrix field.
  MatField apply(const JumpFactorization& f, const MatField& mu, bool dw = false) const;
  /// Discrete L2 norm of mu - I - C_w mu (rows limited by first_row_only).
  double residual(const JumpFactorization& f, const MatField& mu) const;

 private:
  struct Solve {
    MatField u;
    double residual;
    int iterations;
    bool converged;
  };
  Solve neumann(const JumpFactorization& f, const MatField& rhs, bool rows_first_only) const;
  Solve dense(const JumpFactorization& f, const MatField& rhs, bool rows_first_only) const;
  Solve run(const JumpFactorization& f, const MatField& rhs, SolverKind& used) const;

  SpectralGrid zgrid_;
  RhpOptions opts_;
  CauchyProjector proj_;
};

RhpSolution solve_mu(const JumpFactorization& f, const RhpOptions& opts = {});
RhpSolution solve_dmu(const JumpFactorization& f, const RhpSolution& sol, const RhpOptions& opts = {});

/// m1 = -(1 / 2 pi i) int mu (w+ + w-) ds, plus the tail correction if enabled.
///
/// The tail |z| > Z uses the polynomial models of the jump coefficients. The
/// off-diagonal moments take mu_jj ~ 1 - m1~_jj lambda there; the diagonal
/// ones evaluate the off-diagonal entries of mu in the tail as Cauchy
/// integrals of the full jump. For the DeltaConjugated kind,
/// Delta ~ 1 - 2 kappa lambda in the tail and kappa itself gains the tail of
/// (1 / 2 pi i) int log(1 + |r|^2).
Mat2 m1_moment(const JumpFactorization& f, const RhpSolution& sol, bool tail_correction = true);
/// d/dx_H of m1, with the same tail treatment.
Mat2 dx_m1(const JumpFactorization& f, const RhpSolution& sol, bool tail_correction = true);

}  // namespace wki
