#include "wki/soliton.hpp"

#include <cmath>
#include <sstream>

namespace wki {

SolitonParams::SolitonParams(double xi_, double eta_) : xi(xi_), eta(eta_) {
  require(std::isfinite(xi) && std::isfinite(eta), "soliton parameters must be finite");
  require(eta > 0.0, "soliton requires eta > 0");
}

double SolitonParams::alpha() const { return std::atan2(eta, xi); }

bool SolitonParams::bursting() const { return std::abs(std::abs(xi) - std::abs(eta)) <= 1e-14 * eta; }

double soliton_star(double x_h, double t, const SolitonParams& p) {
  return 2.0 * p.eta * x_h - 8.0 * p.xi * p.eta * t;
}

namespace {

// s - tanh(s) without cancellation near s = 0.
double s_minus_tanh(double s) {
  if (std::abs(s) >= 0.1) return s - std::tanh(s);
  const double s2 = s * s;
  return s * s2 * (1.0 / 3.0 + s2 * (-2.0 / 15.0 + s2 * (17.0 / 315.0 + s2 * (-62.0 / 2835.0 + s2 * 1382.0 / 155925.0))));
}

// The phase * solves * - a tanh(*) = c with a = 2 eta^2 / K <= 1 and
// c = 2 eta (x - 4 xi t) + a. Solving for * instead of eps keeps the
// bursting case (a = 1, cubic root at * = 0) well conditioned.
double solve_star(double x, double t, const SolitonParams& p) {
  const double a = 2.0 * p.eta * p.eta / p.K();
  const double base = 2.0 * p.eta * (x - 4.0 * p.xi * t);
  const double c = base + a;
  auto f = [&](double s) { return s_minus_tanh(s) + (1.0 - a) * std::tanh(s) - c; };
  double lo = base, hi = base + 2.0 * a;
  const double flo = f(lo), fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) fail(ErrorKind::InternalError, "soliton phase bracket failed");
  // Exactly, f(lo) = -a (1 + tanh lo) <= 0 and f(hi) = a (1 - tanh hi) >= 0;
  // a rounded sign flip means that end is already the root.
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double sech = 1.0 / std::cosh(s);
    const double df = 1.0 - a * sech * sech;
    if (df < 1e-3) break;
    const double next = s - f(s) / df;
    if (!(next >= lo && next <= hi)) break;
    s = next;
  }
  return s;
}

}  // namespace

double soliton_epsilon(double x, double t, const SolitonParams& p) {
  return p.eta / p.K() * (std::tanh(solve_star(x, t, p)) + 1.0);
}

namespace {

// e^{-i phi}, phi = -2 xi x_H + 4 (xi^2 - eta^2) t
cplx carrier(double x_h, double t, const SolitonParams& p) {
  const double phi = -2.0 * p.xi * x_h + 4.0 * (p.xi * p.xi - p.eta * p.eta) * t;
  return std::exp(-kI * phi);
}

std::variant<cplx, AtSingularity> qh_at(double star, double x_h, double t, const SolitonParams& p) {
  if (p.bursting() && std::abs(star) <= 1e-12) return AtSingularity{star, x_h};
  const double ch = std::cosh(star);
  const double den = ch * ch - 2.0 * p.eta * p.eta / p.K();
  if (den == 0.0 || !std::isfinite(den)) return AtSingularity{star, x_h};
  const cplx num = std::cosh(cplx{star, p.alpha()});
  return 2.0 * kI * (p.eta / std::sqrt(p.K())) * carrier(x_h, t, p) * num / den;
}

}  // namespace

std::variant<cplx, AtSingularity> soliton_qh(double x_h, double t, const SolitonParams& p) {
  return qh_at(soliton_star(x_h, t, p), x_h, t, p);
}

SolitonSample soliton_sample(double x, double t, const SolitonParams& p) {
  SolitonSample s;
  s.x = x;
  s.t = t;
  s.star = solve_star(x, t, p);
  s.eps = p.eta / p.K() * (std::tanh(s.star) + 1.0);
  s.x_h = x + s.eps;
  s.q = qh_at(s.star, s.x_h, t, p);
  return s;
}

std::variant<cplx, AtSingularity> soliton_q(double x, double t, const SolitonParams& p) {
  return soliton_sample(x, t, p).q;
}

double soliton_amplitude_sq(double star, const SolitonParams& p) {
  const double ch2 = std::cosh(star) * std::cosh(star);
  const double k = p.K();
  const double den = ch2 - 2.0 * p.eta * p.eta / k;
  return 4.0 * p.eta * p.eta / k * (ch2 - p.eta * p.eta / k) / (den * den);
}

std::pair<cplx, cplx> soliton_m1_entries(double x_h, double t, const SolitonParams& p) {
  const double star = soliton_star(x_h, t, p);
  const double c = p.eta / p.K();
  const cplx m12 = -c * carrier(x_h, t, p) / std::cosh(star);
  const cplx m11 = kI * c * (std::tanh(star) + 1.0);
  return {m12, m11};
}

cplx soliton_dm12(double x_h, double t, const SolitonParams& p) {
  const double star = soliton_star(x_h, t, p);
  return (2.0 * p.eta / p.K()) * carrier(x_h, t, p) / std::cosh(star) *
         cplx{p.eta * std::tanh(star), -p.xi};
}

double soliton_x_from_star(double star, double t, const SolitonParams& p) {
  const double x_h = (star + 8.0 * p.xi * p.eta * t) / (2.0 * p.eta);
  return x_h - (p.eta / p.K()) * (std::tanh(star) + 1.0);
}

CVec soliton_profile(const SpatialGrid& grid, double t, const SolitonParams& p) {
  CVec q(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const auto v = soliton_q(grid.point(k), t, p);
    if (const auto* s = std::get_if<AtSingularity>(&v)) {
      std::ostringstream os;
      os << "soliton singular at x = " << grid.point(k) << " (* = " << s->star << ")";
      fail(ErrorKind::RangeError, os.str());
    }
    q[k] = std::get<cplx>(v);
  }
  return q;
}

ResidualReport soliton_pde_residual(const SolitonParams& p, const SpatialGrid& grid, double t, int levels,
                                    double dt_ratio) {
  require(!p.bursting(), "PDE residual needs non-bursting parameters");
  require(levels >= 2, "need at least two levels");
  auto value = [&](double x, double tt) {
    const auto v = soliton_q(x, tt, p);
    if (std::holds_alternative<AtSingularity>(v)) fail(ErrorKind::RangeError, "residual grid hits the singularity");
    return std::get<cplx>(v);
  };
  auto flux = [&](double x) {
    const cplx q = value(x, t);
    return q / bracket(q);
  };
  ResidualReport rep;
  double h = grid.spacing();
  for (int l = 0; l < levels; ++l, h *= 0.5) {
    const double dt = dt_ratio * h;
    double worst = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
      const double x = grid.point(k);
      const cplx qt = (value(x, t + dt) - value(x, t - dt)) / (2.0 * dt);
      const cplx fxx = (flux(x + h) - 2.0 * flux(x) + flux(x - h)) / (h * h);
      worst = std::max(worst, std::abs(kI * qt + fxx));
    }
    rep.levels.push_back({h, worst});
  }
  for (std::size_t l = 1; l < rep.levels.size(); ++l)
    rep.ratios.push_back(rep.levels[l - 1].max_residual / rep.levels[l].max_residual);
  return rep;
}

}  // namespace wki
