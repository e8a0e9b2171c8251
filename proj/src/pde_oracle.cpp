#include "wki/pde_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wki {

namespace {

class RhsEvaluator {
 public:
  RhsEvaluator(int n, double h) : fft_(n), k2_(fft_wavenumbers(n, h)) {
    if (n % 2 == 0) k2_[n / 2] = kPi / h;
    for (auto& k : k2_) k = -k * k;
  }

  void operator()(std::span<const cplx> q, CVec& out) const {
    const int n = static_cast<int>(q.size());
    out.resize(n);
    for (int k = 0; k < n; ++k) out[k] = q[k] / bracket(q[k]);
    fft_.forward(out);
    for (int k = 0; k < n; ++k) out[k] *= kI * k2_[k];
    fft_.backward(out);
  }

 private:
  Fft fft_;
  RVec k2_;
};

double mass(std::span<const cplx> q, double h) {
  RVec f(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) f[k] = bracket(q[k]) - 1.0;
  return trapezoid(std::span<const double>(f), h);
}

}  // namespace

CVec wki_rhs(std::span<const cplx> q, double h) {
  CVec out;
  RhsEvaluator(static_cast<int>(q.size()), h)(q, out);
  return out;
}

SpatialFunction wki_rhs(const Potential& p) { return {p.grid, wki_rhs(p.q, p.grid.spacing())}; }

EvolutionRun evolve(const Potential& q0, double T, double dt, const EvolveOptions& opts) {
  require(std::isfinite(T) && T >= 0.0, "evolve: T must be finite and nonnegative");
  const SpatialGrid& g = q0.grid;
  const int n = g.size();
  const double h = g.spacing();
  const double dt_max = opts.cfl * h * h;
  if (dt <= 0.0) dt = dt_max;
  require(dt <= dt_max * (1.0 + 1e-12), "evolve: dt exceeds cfl * h^2");
  const double edge = std::max(std::abs(q0.q.front()), std::abs(q0.q.back()));
  if (edge > opts.decay_tolerance) {
    std::ostringstream os;
    os << "evolve: initial data not decayed at the domain ends (|q| = " << edge << ")";
    fail(ErrorKind::InvalidArgument, os.str());
  }

  EvolutionRun run{q0, T};
  run.steps = T > 0.0 ? static_cast<long>(std::ceil(T / dt - 1e-9)) : 0;
  run.dt = run.steps > 0 ? T / run.steps : 0.0;

  std::vector<long> snap_steps;
  for (double ts : opts.snapshot_times) {
    require(ts >= 0.0 && ts <= T, "snapshot time outside [0, T]");
    snap_steps.push_back(run.dt > 0.0 ? std::lround(ts / run.dt) : 0);
  }
  const double e1_0 = mass(q0.q, h);

  CVec q = q0.q, k1, k2, k3, k4, tmp(n);
  const RhsEvaluator rhs(n, h);
  auto record = [&](long step) {
    run.snapshot_times.push_back(step * run.dt);
    run.snapshots.push_back(q);
    run.e1.push_back(mass(q, h));
    run.e1_drift = std::max(run.e1_drift, std::abs(run.e1.back() - e1_0));
  };
  auto take_snapshots = [&](long step) {
    for (long s : snap_steps)
      if (s == step) record(step);
  };
  take_snapshots(0);
  const double dtv = run.dt;
  for (long step = 1; step <= run.steps; ++step) {
    rhs(q, k1);
    for (int k = 0; k < n; ++k) tmp[k] = q[k] + 0.5 * dtv * k1[k];
    rhs(tmp, k2);
    for (int k = 0; k < n; ++k) tmp[k] = q[k] + 0.5 * dtv * k2[k];
    rhs(tmp, k3);
    for (int k = 0; k < n; ++k) tmp[k] = q[k] + dtv * k3[k];
    rhs(tmp, k4);
    double peak = 0.0;
    int where = 0;
    for (int k = 0; k < n; ++k) {
      q[k] += dtv / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      const double a = std::abs(q[k]);
      if (!(a <= peak)) {
        peak = a;
        where = k;
      }
    }
    if (!(peak <= opts.blowup_guard)) {
      std::ostringstream os;
      os << "blow-up guard tripped at t = " << step * dtv << ", x = " << g.point(where) << " (|q| = " << peak << ")";
      fail(ErrorKind::EvolutionDiverged, os.str());
    }
    take_snapshots(step);
  }
  if (snap_steps.empty() || std::find(snap_steps.begin(), snap_steps.end(), run.steps) == snap_steps.end())
    record(run.steps);
  run.final_q = q;
  return run;
}

}  // namespace wki
