#include "wki/reconstruction.hpp"

#include <algorithm>
#include <math.h>  // pchip uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <sstream>

#include "wki/parallel.hpp"

namespace wki {

cplx qh_from_slope(cplx s, double margin) {
  const double abs_s = std::abs(s);
  if (!(abs_s < 1.0 - margin)) {
    std::ostringstream os;
    os << "slope |s| = " << abs_s << " is not below 1 - " << margin;
    fail(ErrorKind::SlopeConditionViolated, os.str());
  }
  // <q_H> = 1 / sqrt(1 - |s|^2)
  return s / std::sqrt(1.0 - abs_s * abs_s);
}

struct MonotoneCubic::Impl {
  boost::math::interpolators::pchip<RVec> spline;
};

MonotoneCubic::MonotoneCubic(RVec nodes, RVec values) {
  require(nodes.size() == values.size() && nodes.size() >= 4, "monotone cubic needs >= 4 matching samples");
  lo_ = nodes.front();
  hi_ = nodes.back();
  impl_ = std::make_shared<const Impl>(Impl{boost::math::interpolators::pchip<RVec>(std::move(nodes), std::move(values))});
}

double MonotoneCubic::operator()(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  return impl_->spline(x);
}

FixedPointResult epsilon_fixed_point(std::span<const double> x_h, std::span<const cplx> q_h,
                                     const SpatialGrid& xgrid, const FixedPointOptions& opts) {
  require(x_h.size() == q_h.size(), "x_H and q_H sample counts differ");
  RVec h_vals(q_h.size());
  for (std::size_t k = 0; k < q_h.size(); ++k) h_vals[k] = bracket(q_h[k]) - 1.0;
  const MonotoneCubic h_interp(RVec(x_h.begin(), x_h.end()), std::move(h_vals));

  const int n = xgrid.size();
  const RVec x = xgrid.points();
  FixedPointResult res;
  res.eps.assign(n, 0.0);
  RVec integrand(n);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (int k = 0; k < n; ++k) integrand[k] = h_interp(x[k] + res.eps[k]);
    RVec next = cumulative_integral(std::span<const double>(integrand), xgrid.spacing());
    double change = 0.0;
    for (int k = 0; k < n; ++k) change = std::max(change, std::abs(next[k] - res.eps[k]));
    res.eps = std::move(next);
    res.iterations = it;
    res.last_change = change;
    if (change < opts.tolerance) return res;
  }
  std::ostringstream os;
  os << "epsilon fixed point did not converge in " << opts.max_iterations << " iterations (last change "
     << res.last_change << ")";
  fail(ErrorKind::HodographUnsolved, os.str());
}

RVec x_from_m11(std::span<const double> x_h, std::span<const cplx> m11, double tolerance) {
  require(x_h.size() == m11.size(), "x_H and m1_11 sample counts differ");
  RVec x(x_h.size());
  for (std::size_t k = 0; k < x_h.size(); ++k) {
    if (std::abs(m11[k].real()) > tolerance || m11[k].imag() < -tolerance) {
      std::ostringstream os;
      os << "m1_11 = " << m11[k] << " at x_H = " << x_h[k] << " is not a nonnegative imaginary number";
      fail(ErrorKind::HodographInconsistent, os.str());
    }
    // x = x_H - (1/i) m1_11
    x[k] = x_h[k] - (m11[k] / kI).real();
    if (k > 0 && !(x[k] > x[k - 1])) {
      std::ostringstream os;
      os << "hodograph map not increasing at x_H = " << x_h[k];
      fail(ErrorKind::HodographInconsistent, os.str());
    }
  }
  return x;
}

namespace {

CVec interpolate_complex(std::span<const double> nodes, std::span<const cplx> values, std::span<const double> at) {
  RVec re(values.size()), im(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    re[k] = values[k].real();
    im[k] = values[k].imag();
  }
  const MonotoneCubic fr(RVec(nodes.begin(), nodes.end()), std::move(re));
  const MonotoneCubic fi(RVec(nodes.begin(), nodes.end()), std::move(im));
  CVec out(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) out[k] = {fr(at[k]), fi(at[k])};
  return out;
}

}  // namespace

Resampled resample_q(std::span<const double> x_h, std::span<const cplx> q_h, std::span<const double> eps,
                     const SpatialGrid& xgrid, double decay_tolerance) {
  const int n = xgrid.size();
  require(static_cast<int>(eps.size()) == n, "eps must be sampled on the x grid");
  RVec target(n);
  for (int k = 0; k < n; ++k) {
    target[k] = xgrid.point(k) + eps[k];
    const bool below = target[k] < x_h.front(), above = target[k] > x_h.back();
    if ((below && std::abs(q_h.front()) > decay_tolerance) || (above && std::abs(q_h.back()) > decay_tolerance)) {
      std::ostringstream os;
      os << "x = " << xgrid.point(k) << " maps to x_H = " << target[k]
         << " outside the swept range where q_H has not decayed";
      fail(ErrorKind::RangeError, os.str());
    }
  }
  Resampled out;
  out.q = interpolate_complex(x_h, q_h, target);

  // Halving estimate: interpolate from even samples, compare at odd ones.
  if (x_h.size() >= 9) {
    RVec xe, xo;
    CVec qe, qo;
    for (std::size_t k = 0; k < x_h.size(); ++k) {
      if (k % 2 == 0) {
        xe.push_back(x_h[k]);
        qe.push_back(q_h[k]);
      } else if (k + 1 < x_h.size()) {
        xo.push_back(x_h[k]);
        qo.push_back(q_h[k]);
      }
    }
    const CVec coarse = interpolate_complex(xe, qe, xo);
    for (std::size_t k = 0; k < xo.size(); ++k)
      out.interpolation_error = std::max(out.interpolation_error, std::abs(coarse[k] - qo[k]));
  }
  return out;
}

ReconstructionResult inverse_transform(const ScatteringData& sd, double t, const SpatialGrid& xgrid,
                                       const InverseOptions& opts) {
  require(std::isfinite(t), "inverse_transform: t must be finite");
  const SpectralGrid& zg = sd.zgrid;
  const SpectralFunction r(zg, sd.r);
  const double dt = t - sd.t;

  ReconstructionResult res{xgrid, t};
  cplx log_total{};
  for (const auto& v : sd.r) log_total += std::log1p(std::norm(v));
  res.mass_from_r = log_total.real() * zg.spacing() / (2.0 * kPi);

  // x_H sweep: x_H = x + eps with 0 <= eps <= mass, so extend the x grid by the mass.
  const double h = xgrid.spacing();
  const int extra = static_cast<int>(std::ceil(res.mass_from_r / h)) + 2;
  const int nh = xgrid.size() + extra;
  res.x_h.resize(nh);
  for (int j = 0; j < nh; ++j) res.x_h[j] = xgrid.point(0) + j * h;

  const bool need_delta = opts.factorization != FactorizationPolicy::TriangularOnly;
  const RhpSolver solver(zg, opts.rhp);
  const DeltaFunction delta = need_delta ? delta_function(solver.projector(), sd.r) : DeltaFunction{};

  res.m11.resize(nh);
  res.m12.resize(nh);
  res.slope.resize(nh);
  res.q_h.resize(nh);
  res.cells.resize(nh);
  parallel_for(
      nh,
      [&](int j) {
        const double xh = res.x_h[j];
        FactorizationKind kind = FactorizationKind::Triangular;
        if (opts.factorization == FactorizationPolicy::DeltaConjugatedOnly ||
            (opts.factorization == FactorizationPolicy::Auto && xh > 0.0))
          kind = FactorizationKind::DeltaConjugated;
        try {
          const JumpFactorization f = build_factorization(r, xh, dt, kind, need_delta ? &delta : nullptr);
          const RhpSolution sol = solver.solve(f);
          res.m11[j] = sol.m1(0, 0);
          res.m12[j] = sol.m1(0, 1);
          res.slope[j] = sol.dx_m1(0, 1);
          res.cells[j] = {xh, t, kind, sol.solver, sol.iterations, sol.d_iterations,
                          sol.residual, sol.d_residual, std::abs(res.slope[j])};
          res.q_h[j] = qh_from_slope(res.slope[j], opts.slope_margin);
        } catch (const Error& e) {
          std::ostringstream os;
          os << e.what() << " [cell x_H = " << xh << ", t = " << t << "]";
          fail(e.kind(), os.str());
        }
      },
      opts.threads);

  for (const auto& c : res.cells) {
    res.max_slope = std::max(res.max_slope, c.abs_slope);
    res.max_residual = std::max({res.max_residual, c.residual, c.d_residual});
  }

  // Route 1: fixed point.
  const FixedPointResult fp = epsilon_fixed_point(res.x_h, res.q_h, xgrid, opts.fixed_point);
  res.eps = fp.eps;
  res.fixed_point_iterations = fp.iterations;
  res.eps_infinity = res.eps.back();
  for (std::size_t k = 1; k < res.eps.size(); ++k)
    res.eps_monotonicity_defect = std::max(res.eps_monotonicity_defect, res.eps[k - 1] - res.eps[k]);

  // Route 2: explicit map from m1_11.
  res.x_of_xh = x_from_m11(res.x_h, res.m11, opts.imaginary_tolerance);
  res.map_slope_min = std::numeric_limits<double>::infinity();
  res.map_slope_max = -res.map_slope_min;
  for (int j = 1; j < nh; ++j) {
    const double slope = (res.x_of_xh[j] - res.x_of_xh[j - 1]) / h;
    res.map_slope_min = std::min(res.map_slope_min, slope);
    res.map_slope_max = std::max(res.map_slope_max, slope);
  }
  {
    RVec eps_nodes(nh);
    for (int j = 0; j < nh; ++j) eps_nodes[j] = res.x_h[j] - res.x_of_xh[j];
    const MonotoneCubic eps_of_x(res.x_of_xh, eps_nodes);
    const int n = xgrid.size();
    res.eps_explicit.resize(n);
    for (int k = 0; k < n; ++k) {
      const double x = std::clamp(xgrid.point(k), eps_of_x.front(), eps_of_x.back());
      res.eps_explicit[k] = eps_of_x(x);
      res.route_gap = std::max(res.route_gap, std::abs(res.eps_explicit[k] - res.eps[k]));
    }
    const int j0 = static_cast<int>(std::lround(-xgrid.point(0) / h));
    res.x_c = res.x_of_xh[std::clamp(j0, 0, nh - 1)];
  }

  RVec inv(nh);
  for (int j = 0; j < nh; ++j) inv[j] = 1.0 - 1.0 / bracket(res.q_h[j]);
  res.mass_qh = trapezoid(std::span<const double>(inv), h);

  const Resampled rs = resample_q(res.x_h, res.q_h, res.eps, xgrid);
  res.q = rs.q;
  res.interpolation_error = rs.interpolation_error;
  return res;
}

}  // namespace wki
