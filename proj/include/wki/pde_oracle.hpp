#pragma once

#include <vector>

#include "wki/lax.hpp"

namespace wki {

/// i d^2/dx^2 (q / <q>) with a spectral second derivative.
CVec wki_rhs(std::span<const cplx> q, double h);
SpatialFunction wki_rhs(const Potential& p);

struct EvolveOptions {
  double cfl = 0.2;             // dt <= cfl * h^2
  double blowup_guard = 1e3;    // max |q| before aborting
  double decay_tolerance = 1e-6;
  std::vector<double> snapshot_times;
};

struct EvolutionRun {
  Potential initial;
  double T = 0.0;
  double dt = 0.0;
  long steps = 0;
  std::vector<double> snapshot_times;
  std::vector<CVec> snapshots;
  std::vector<double> e1;  // E1 at each snapshot
  double e1_drift = 0.0;   // max |E1(t) - E1(0)| over snapshots
  CVec final_q;
};

/// Classical RK4 to time T. dt <= 0 picks the largest step T/n within the CFL
/// bound. Snapshots are taken at the step nearest each requested time; the
/// final state is always recorded as a snapshot.
EvolutionRun evolve(const Potential& q0, double T, double dt = 0.0, const EvolveOptions& opts = {});

}  // namespace wki
