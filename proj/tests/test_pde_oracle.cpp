#include <doctest.h>

#include "oracles.hpp"
#include "wki/pde_oracle.hpp"
#include "wki/soliton.hpp"

using namespace wki;

namespace {

Potential gaussian(double L, int N, cplx amp, double width = 1.0, double k0 = 0.0) {
  const SpatialGrid g(L, N);
  CVec q(N);
  for (int j = 0; j < N; ++j) {
    const double x = g.point(j) / width;
    q[j] = amp * std::exp(-x * x + kI * k0 * g.point(j));
  }
  return make_potential(g, q);
}

double sup_diff(const CVec& a, const CVec& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("right-hand side of trivial data") {
  const SpatialGrid g(5.0, 64);
  for (const auto& v : wki_rhs(make_potential(g, CVec(64))).values) CHECK(v == cplx{});
  for (const auto& v : wki_rhs(make_potential(g, CVec(64, cplx{0.3, -0.2}))).values) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("right-hand side matches fourth-order differences") {
  const Potential p = gaussian(10.0, 4096, 0.05);
  CVec flux(p.q.size());
  for (std::size_t k = 0; k < flux.size(); ++k) flux[k] = p.q[k] / bracket(p.q[k]);
  const CVec d2 = oracle::fd4_second(flux, p.grid.spacing());
  const CVec rhs = wki_rhs(p).values;
  double err = 0.0;
  for (std::size_t k = 0; k < rhs.size(); ++k) err = std::max(err, std::abs(rhs[k] - kI * d2[k]));
  CHECK(err < 1e-6);
}

TEST_CASE("zero data stays zero") {
  const EvolutionRun run = evolve(make_potential(SpatialGrid(5.0, 64), CVec(64)), 0.1);
  for (const auto& v : run.final_q) CHECK(v == cplx{});
}

TEST_CASE("mass drift for small data") {
  const EvolutionRun run = evolve(gaussian(20.0, 1024, 0.05), 0.5);
  MESSAGE("E1 drift " << run.e1_drift << " in " << run.steps << " steps");
  CHECK(run.e1_drift < 1e-8);
  CHECK(run.dt <= 0.2 * run.initial.grid.spacing() * run.initial.grid.spacing() * (1.0 + 1e-12));
}

TEST_CASE("time step halving is fourth order") {
  const Potential p = gaussian(8.0, 256, 0.5, 0.6, 2.0);
  const double h2 = p.grid.spacing() * p.grid.spacing();
  const double T = 0.05;
  const double dt = 0.2 * h2;
  const int n = static_cast<int>(std::ceil(T / dt));
  const CVec a = evolve(p, T, T / n).final_q;
  const CVec b = evolve(p, T, T / (2 * n)).final_q;
  const CVec c = evolve(p, T, T / (4 * n)).final_q;
  const double d1 = sup_diff(a, b), d2 = sup_diff(b, c);
  MESSAGE("self differences " << d1 << " " << d2);
  CHECK(d2 > 1e-13);
  CHECK(d1 / d2 >= 8.0);
}

TEST_CASE("conjugate flow reverses time") {
  const Potential p = gaussian(10.0, 256, {0.2, 0.1}, 1.0, 1.0);
  const EvolutionRun fwd = evolve(p, 0.2);
  CVec back(fwd.final_q.size());
  for (std::size_t k = 0; k < back.size(); ++k) back[k] = std::conj(fwd.final_q[k]);
  const EvolutionRun rev = evolve(make_potential(p.grid, back), 0.2);
  double err = 0.0;
  for (std::size_t k = 0; k < back.size(); ++k) err = std::max(err, std::abs(std::conj(rev.final_q[k]) - p.q[k]));
  CHECK(err < 1e-6);
}

TEST_CASE("soliton evolution") {
  const SolitonParams sp(3.0, 1.0);
  const SpatialGrid g(20.0, 2048);
  const EvolutionRun run = evolve(make_potential(g, soliton_profile(g, 0.0, sp)), 0.25);
  const double err = sup_diff(run.final_q, soliton_profile(g, 0.25, sp));
  MESSAGE("soliton vs PDE " << err);
  CHECK(err < 1e-3);
}

TEST_CASE("snapshots and guards") {
  EvolveOptions o;
  o.snapshot_times = {0.0, 0.05};
  const EvolutionRun run = evolve(gaussian(10.0, 128, 0.05), 0.1, 0.0, o);
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshot_times.back() == doctest::Approx(0.1));

  const Potential p = gaussian(10.0, 128, 0.05);
  CHECK_THROWS_AS(evolve(p, 0.1, 1.0), Error);  // violates the CFL bound

  EvolveOptions guard;
  guard.blowup_guard = 0.01;
  try {
    evolve(p, 0.01, 0.0, guard);
    FAIL("expected evolution-diverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EvolutionDiverged);
  }
}
