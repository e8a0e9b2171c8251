#include "wki/direct_scattering.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "wki/parallel.hpp"

namespace wki {

namespace {

Mat2 free_solution(double lambda, double x) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::exp(kI * lambda * x);
  m(1, 1) = std::exp(-kI * lambda * x);
  return m;
}

cplx det(const Eigen::Vector2cd& u, const Eigen::Vector2cd& v) { return u(0) * v(1) - u(1) * v(0); }

int substeps_for(cplx q0, cplx q1, double lambda, double h, const PropagationOptions& opts) {
  if (opts.forced_substeps > 0) return opts.forced_substeps;
  const double m_norm = std::sqrt(2.0) * std::max(std::abs(q0), std::abs(q1));
  const double indicator = lambda * lambda * m_norm * h * h * h;
  if (indicator <= opts.local_error_bound) return 1;
  const double ratio = std::cbrt(indicator / opts.local_error_bound);
  if (ratio > 1e7)
    fail(ErrorKind::ResolutionExceeded, "lambda too large for the spatial grid");
  return static_cast<int>(std::ceil(ratio));
}

// Steps psi across one grid interval from x_k to x_k + h (h may be negative).
// q holds the samples at x_k - h, x_k, x_k + h, x_k + 2h in travel order.
void step_interval(Mat2& psi, const std::array<cplx, 4>& q, double lambda, double h, int substeps,
                   Interpolation interp) {
  const double hs = h / substeps;
  for (int s = 0; s < substeps; ++s) {
    const double u = (s + 0.5) / substeps;
    cplx qm;
    if (interp == Interpolation::Linear) {
      qm = q[1] + u * (q[2] - q[1]);
    } else {
      qm = -u * (u - 1.0) * (u - 2.0) / 6.0 * q[0] + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * q[1] -
           (u + 1.0) * u * (u - 2.0) / 2.0 * q[2] + (u + 1.0) * u * (u - 1.0) / 6.0 * q[3];
    }
    psi = magnus_step(qm, lambda, hs) * psi;
  }
}

class Propagator {
 public:
  Propagator(const Potential& p, double lambda, const PropagationOptions& opts)
      : p_(p), lambda_(lambda), opts_(opts) {
    require(std::isfinite(lambda), "lambda must be finite");
  }

  // Visits psi at every grid index from the normalization end toward `stop`.
  template <class Visit>
  long run(JostSide side, int stop, Visit&& visit) const {
    const int n = p_.grid.size();
    const double h = p_.grid.spacing();
    long steps = 0;
    if (side == JostSide::Minus) {
      Mat2 psi = free_solution(lambda_, p_.grid.point(0));
      visit(0, psi);
      for (int k = 0; k < stop; ++k) {
        const int sub = substeps_for(p_.q[k], p_.q[k + 1], lambda_, h, opts_);
        steps += sub;
        check(steps);
        step_interval(psi, {sample(k - 1), p_.q[k], p_.q[k + 1], sample(k + 2)}, lambda_, h, sub,
                      opts_.interpolation);
        visit(k + 1, psi);
      }
    } else {
      Mat2 psi = free_solution(lambda_, p_.grid.point(n - 1));
      visit(n - 1, psi);
      for (int k = n - 1; k > stop; --k) {
        const int sub = substeps_for(p_.q[k], p_.q[k - 1], lambda_, h, opts_);
        steps += sub;
        check(steps);
        step_interval(psi, {sample(k + 1), p_.q[k], p_.q[k - 1], sample(k - 2)}, lambda_, -h, sub,
                      opts_.interpolation);
        visit(k - 1, psi);
      }
    }
    return steps;
  }

 private:
  // Samples beyond the grid ends are zero (the potential has decayed there).
  cplx sample(int k) const { return k < 0 || k >= p_.grid.size() ? cplx{} : p_.q[k]; }

  void check(long steps) const {
    if (steps > opts_.max_steps) {
      std::ostringstream os;
      os << "Jost propagation at lambda = " << lambda_ << " exceeded " << opts_.max_steps << " steps";
      fail(ErrorKind::ResolutionExceeded, os.str());
    }
  }

  const Potential& p_;
  double lambda_;
  const PropagationOptions& opts_;
};

std::pair<Mat2, Mat2> jost_at_center(const Potential& p, double lambda, const PropagationOptions& opts) {
  const int mid = p.grid.center_index();
  Propagator prop(p, lambda, opts);
  Mat2 minus, plus;
  prop.run(JostSide::Minus, mid, [&](int k, const Mat2& psi) { if (k == mid) minus = psi; });
  prop.run(JostSide::Plus, mid, [&](int k, const Mat2& psi) { if (k == mid) plus = psi; });
  return {plus, minus};
}

}  // namespace

Mat2 magnus_step(cplx q, double lambda, double h) {
  const double omega = std::abs(lambda) * bracket(q);
  const double arg = h * omega;
  const double c = std::cos(arg);
  // sin(h omega) / omega, continuous at omega = 0
  const double s = std::abs(arg) < 1e-8 ? h * (1.0 - arg * arg / 6.0) : std::sin(arg) / omega;
  Mat2 e;
  e << c + s * kI * lambda, -s * lambda * q,
       s * lambda * std::conj(q), c - s * kI * lambda;
  return e;
}

JostSolution propagate_jost(const Potential& p, double lambda, JostSide side,
                            const PropagationOptions& opts) {
  JostSolution sol;
  sol.lambda = lambda;
  sol.side = side;
  sol.psi.resize(p.grid.size());
  const int stop = side == JostSide::Minus ? p.grid.size() - 1 : 0;
  sol.steps = Propagator(p, lambda, opts).run(side, stop, [&](int k, const Mat2& psi) { sol.psi[k] = psi; });
  return sol;
}

TransitionMatrix transition_matrix(const Potential& p, double lambda, const PropagationOptions& opts) {
  const auto [plus, minus] = jost_at_center(p, lambda, opts);
  TransitionMatrix tm;
  tm.lambda = lambda;
  tm.a = det(plus.col(0), minus.col(1));
  tm.b = det(minus.col(0), plus.col(0));
  tm.c = det(minus.col(0), plus.col(1));
  tm.d = det(plus.col(1), minus.col(1));
  tm.T << tm.a, tm.d, tm.b, tm.c;
  tm.symmetry_defect = std::abs(tm.d + std::conj(tm.b)) + std::abs(tm.c - std::conj(tm.a));
  tm.unitarity_defect = std::abs(std::norm(tm.a) + std::norm(tm.b) - 1.0);
  tm.det_defect = std::max(std::abs(plus.determinant() - 1.0), std::abs(minus.determinant() - 1.0));
  return tm;
}

cplx b_from_limit_formula(const Potential& p, double lambda, const PropagationOptions& opts) {
  const JostSolution plus = propagate_jost(p, lambda, JostSide::Plus, opts);
  const int n = p.grid.size();
  CVec integrand(n);
  for (int k = 0; k < n; ++k) {
    const double y = p.grid.point(k);
    const cplx m11 = plus.psi[k](0, 0) * std::exp(-kI * lambda * y);
    integrand[k] = std::exp(2.0 * kI * lambda * y) * std::conj(p.q[k]) * m11;
  }
  return -lambda * trapezoid(std::span<const cplx>(integrand), p.grid.spacing());
}

ScatteringData reflection_coefficient(const Potential& p, const SpectralGrid& zgrid,
                                      const ScatteringOptions& opts) {
  const int nz = zgrid.size();
  ScatteringData sd{zgrid, CVec(nz, cplx{})};
  std::vector<TransitionMatrix> cells(nz);
  parallel_for(nz, [&](int k) {
    if (zgrid.is_active(k)) cells[k] = transition_matrix(p, -1.0 / zgrid.point(k), opts.propagation);
  });

  double inner = 0.0;
  for (int k = 0; k < nz; ++k) {
    if (!zgrid.is_active(k)) continue;
    const auto& tm = cells[k];
    sd.r[k] = tm.b / tm.a;
    sd.min_abs_a = std::min(sd.min_abs_a, std::abs(tm.a));
    sd.max_unitarity_defect = std::max(sd.max_unitarity_defect, tm.unitarity_defect);
    sd.max_symmetry_defect = std::max(sd.max_symmetry_defect, tm.symmetry_defect);
    sd.max_det_defect = std::max(sd.max_det_defect, tm.det_defect);
    if (std::abs(zgrid.point(k)) < zgrid.z_min() + 2.0 * zgrid.spacing())
      inner = std::max(inner, std::abs(sd.r[k]));
  }
  sd.inner_truncation = inner;
  sd.outer_truncation = CauchyProjector::edge_level(sd.r);

  for (double lam : opts.diagnostic_lambdas) {
    const auto tm = transition_matrix(p, lam, opts.propagation);
    sd.lambdas.push_back(lam);
    sd.a.push_back(tm.a);
    sd.b.push_back(tm.b);
    sd.min_abs_a = std::min(sd.min_abs_a, std::abs(tm.a));
    sd.max_unitarity_defect = std::max(sd.max_unitarity_defect, tm.unitarity_defect);
    sd.max_symmetry_defect = std::max(sd.max_symmetry_defect, tm.symmetry_defect);
  }

  if (opts.winding_check) {
    const double lmax = opts.winding_lambda_max > 0.0 ? opts.winding_lambda_max : 1.0 / zgrid.z_min();
    sd.winding = a_winding(p, lmax, opts.winding_step, opts.propagation);
    if (std::abs(sd.winding) > 0.5) {
      std::ostringstream os;
      os << "a(lambda) winds " << sd.winding << " times (zeros of a off the real line)";
      fail(ErrorKind::PossibleBoundState, os.str());
    }
  }
  if (sd.min_abs_a < opts.min_abs_a) {
    std::ostringstream os;
    os << "min |a| = " << sd.min_abs_a << " below floor " << opts.min_abs_a
       << " (potential outside the small-data regime)";
    fail(ErrorKind::PossibleBoundState, os.str());
  }
  return sd;
}

double a_winding(const Potential& p, double lambda_max, double step, const PropagationOptions& opts) {
  require(lambda_max > 0.0 && step > 0.0, "winding grid needs positive extent and step");
  const int count = 2 * static_cast<int>(std::ceil(lambda_max / step)) + 1;
  const double dl = 2.0 * lambda_max / (count - 1);
  const double int_h = akns_potentials(p).integral_H();
  CVec at(count);
  parallel_for(count, [&](int k) {
    const double lam = -lambda_max + k * dl;
    at[k] = transition_matrix(p, lam, opts).a * std::exp(kI * lam * int_h);
  });
  double total = 0.0;
  for (int k = 1; k < count; ++k) total += std::arg(at[k] / at[k - 1]);
  return total / (2.0 * kPi);
}

ScatteringData evolve_reflection(const ScatteringData& sd, double t) {
  require(std::isfinite(t), "evolution time must be finite");
  ScatteringData out = sd;
  for (int k = 0; k < sd.zgrid.size(); ++k) {
    if (sd.r[k] == cplx{}) continue;
    const double z = sd.zgrid.point(k);
    out.r[k] = sd.r[k] * std::exp(4.0 * kI * t / (z * z));
  }
  out.t = sd.t + t;
  return out;
}

std::vector<AsymptoticDefect> check_a_asymptotics(const Potential& p, std::span<const double> lambdas,
                                                  const PropagationOptions& opts) {
  const AknsFields f = akns_potentials(p);
  const double int_h = f.integral_H();
  const cplx int_b = f.integral_B();
  std::vector<AsymptoticDefect> out;
  for (double lam : lambdas) {
    const auto tm = transition_matrix(p, lam, opts);
    out.push_back({lam, std::abs(tm.a * std::exp(kI * lam * int_h) - std::exp(-int_b))});
  }
  return out;
}

}  // namespace wki
