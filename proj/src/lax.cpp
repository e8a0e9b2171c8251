#include "wki/lax.hpp"

#include <algorithm>
#include <cmath>

namespace wki {

namespace {

CVec centered_difference(std::span<const cplx> f, double h) {
  const int n = static_cast<int>(f.size());
  CVec d(n);
  for (int k = 0; k < n; ++k) {
    const cplx left = f[(k - 1 + n) % n];
    const cplx right = f[(k + 1) % n];
    d[k] = (right - left) / (2.0 * h);
  }
  return d;
}

}  // namespace

Potential make_potential(const SpatialGrid& grid, CVec q, DerivativeMethod method) {
  require(static_cast<int>(q.size()) == grid.size(), "potential sample count does not match grid");
  for (const auto& v : q)
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), "potential sample is not finite");

  Potential p{grid, std::move(q), {}, method};
  const double h = grid.spacing();
  p.qx = method == DerivativeMethod::Spectral ? spectral_derivative(p.q, h)
                                              : centered_difference(p.q, h);
  double w0 = 0.0, w1 = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double weight = 1.0 + grid.point(k) * grid.point(k);
    p.sup_norm = std::max(p.sup_norm, std::abs(p.q[k]));
    w0 += weight * std::norm(p.q[k]);
    w1 += weight * std::norm(p.qx[k]);
  }
  p.weighted_l2 = std::sqrt(w0 * h);
  p.weighted_l2_dx = std::sqrt(w1 * h);
  return p;
}

Mat2 eigvec_matrix(cplx q) {
  const double b = bracket(q);
  const double scale = 1.0 / (std::sqrt(2.0) * std::sqrt(b * b + b));
  Mat2 g;
  g << (1.0 + b) * scale, -kI * q * scale,
       -kI * std::conj(q) * scale, (1.0 + b) * scale;
  return g;
}

AknsFields akns_potentials(const Potential& p) {
  const int n = p.grid.size();
  const double h = p.grid.spacing();
  AknsFields f;
  f.spacing = h;
  f.Q.resize(n);
  f.B.resize(n);
  f.H.resize(n);
  f.G.resize(n);
  for (int k = 0; k < n; ++k) {
    const cplx q = p.q[k];
    const cplx qx = p.qx[k];
    const double b = bracket(q);
    const double denom = 4.0 * (b * b + b);
    const double b_x = std::real(std::conj(q) * qx) / b;
    // Off-diagonal entry of -G^{-1} G_x; note the factor 2 relative to denom.
    f.Q[k] = -2.0 * kI / denom * (q * b_x - qx * (1.0 + b));
    // q_x conj(q) - q conj(q_x) = 2i Im(q_x conj(q)); keep B exactly imaginary.
    f.B[k] = cplx{0.0, 2.0 * std::imag(qx * std::conj(q)) / denom};
    f.H[k] = b - 1.0;
    f.G[k] = eigvec_matrix(q);
  }
  RVec cum = cumulative_integral(std::span<const double>(f.H), h);
  f.p.resize(n);
  for (int k = 0; k < n; ++k) f.p[k] = p.grid.point(k) + cum[k];
  return f;
}

cplx AknsFields::integral_B() const { return trapezoid(std::span<const cplx>(B), spacing); }

double AknsFields::integral_H() const { return trapezoid(std::span<const double>(H), spacing); }

std::vector<std::pair<cplx, cplx>> AknsFields::gauge(bool from_left) const {
  const CVec cum = cumulative_integral(std::span<const cplx>(B), spacing);
  const cplx total = cum.empty() ? cplx{} : cum.back();
  std::vector<std::pair<cplx, cplx>> g(cum.size());
  for (std::size_t k = 0; k < cum.size(); ++k) {
    const cplx integral = from_left ? cum[k] : cum[k] - total;
    g[k] = {std::exp(-integral), std::exp(integral)};
  }
  return g;
}

double conserved_E1(const Potential& p) {
  RVec h(p.q.size());
  for (std::size_t k = 0; k < p.q.size(); ++k) h[k] = bracket(p.q[k]) - 1.0;
  return trapezoid(std::span<const double>(h), p.grid.spacing());
}

E2Result conserved_E2(const Potential& p, const E2Options& opts) {
  const int n = p.grid.size();
  CVec grad(n, cplx{}), ratio(n, cplx{});
  int excluded = 0;
  for (int k = 0; k < n; ++k) {
    const cplx q = p.q[k];
    const cplx qx = p.qx[k];
    const double b = bracket(q);
    grad[k] = 0.5 * 2.0 * std::real(std::conj(q) * qx) / (b * b);
    if (std::abs(q) <= opts.guard) {
      ++excluded;
      continue;
    }
    ratio[k] = qx / q * (1.0 - b) / b;
  }
  E2Result r;
  r.excluded_fraction = static_cast<double>(excluded) / n;
  if (r.excluded_fraction > opts.max_excluded_fraction)
    fail(ErrorKind::DiagnosticUnreliable,
         "E2 guard excluded " + std::to_string(r.excluded_fraction * 100.0) + "% of the grid");
  const double h = p.grid.spacing();
  r.gradient_term = trapezoid(std::span<const cplx>(grad), h);
  r.ratio_term = trapezoid(std::span<const cplx>(ratio), h);
  r.value = r.gradient_term + r.ratio_term;
  return r;
}

}  // namespace wki
