#include <doctest.h>

#include "oracles.hpp"
#include "wki/lax.hpp"
#include "wki/pde_oracle.hpp"
#include "wki/soliton.hpp"

using namespace wki;

namespace {

Potential gaussian(double L, int N, cplx amp, double k0 = 0.0) {
  const SpatialGrid g(L, N);
  CVec q(N);
  for (int j = 0; j < N; ++j) {
    const double x = g.point(j);
    q[j] = amp * std::exp(-x * x + kI * k0 * x);
  }
  return make_potential(g, q);
}

// Smooth random complex potential: a few Gaussian bumps.
Potential random_potential(double L, int N) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto& gen = oracle::rng();
  const SpatialGrid g(L, N);
  CVec q(N);
  for (int bump = 0; bump < 4; ++bump) {
    const cplx c{u(gen), u(gen)};
    const double center = 3.0 * u(gen), k0 = 2.0 * u(gen);
    for (int j = 0; j < N; ++j) {
      const double x = g.point(j) - center;
      q[j] += c * std::exp(-x * x + kI * k0 * x);
    }
  }
  return make_potential(g, q);
}

}  // namespace

TEST_CASE("eigenvector matrix") {
  const Mat2 g0 = eigvec_matrix(0.0);
  CHECK(std::abs(g0(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(g0(0, 1)) < 1e-15);
  CHECK(std::abs(g0(1, 1) - 1.0) < 1e-15);

  // q = 1: <q> = sqrt 2, scale 1 / sqrt(2 (2 + sqrt 2)).
  const double s = 1.0 / std::sqrt(2.0 * (2.0 + std::sqrt(2.0)));
  const Mat2 g1 = eigvec_matrix(1.0);
  CHECK(std::abs(g1(0, 0) - (1.0 + std::sqrt(2.0)) * s) < 1e-14);
  CHECK(std::abs(g1(0, 1) + kI * s) < 1e-14);
  CHECK(std::abs(g1(1, 0) + kI * s) < 1e-14);
  CHECK(std::abs(g1(1, 1) - (1.0 + std::sqrt(2.0)) * s) < 1e-14);

  // It diagonalizes the x-part: G^{-1} (i sigma3 - M) G = i <q> sigma3.
  const cplx q{0.7, -1.3};
  Mat2 A;
  A << kI, -q, std::conj(q), -kI;
  const Mat2 G = eigvec_matrix(q);
  const Mat2 D = G.inverse() * A * G;
  CHECK(std::abs(D(0, 1)) < 1e-13);
  CHECK(std::abs(D(1, 0)) < 1e-13);
  CHECK(std::abs(D(0, 0) - kI * bracket(q)) < 1e-13);
}

TEST_CASE("eigenvector matrix has unit determinant for random q") {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    cplx q{u(oracle::rng()), u(oracle::rng())};
    if (std::abs(q) > 10.0) q *= 10.0 / std::abs(q);
    worst = std::max(worst, std::abs(eigvec_matrix(q).determinant() - 1.0));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("AKNS fields of special potentials") {
  const Potential zero = make_potential(SpatialGrid(10.0, 128), CVec(128));
  const AknsFields f0 = akns_potentials(zero);
  for (int k = 0; k < 128; ++k) {
    CHECK(f0.Q[k] == cplx{});
    CHECK(f0.B[k] == cplx{});
    CHECK(f0.H[k] == 0.0);
  }

  const AknsFields fr = akns_potentials(gaussian(10.0, 512, 0.5));
  for (const auto& b : fr.B) CHECK(std::abs(b) < 1e-14);
}

TEST_CASE("AKNS field properties on random potentials") {
  for (int trial = 0; trial < 20; ++trial) {
    const Potential p = random_potential(10.0, 512);
    const AknsFields f = akns_potentials(p);
    double re_b = 0.0;
    for (const auto& b : f.B) re_b = std::max(re_b, std::abs(b.real()));
    CHECK(re_b < 1e-10);
    for (const double h : f.H) CHECK(h >= 0.0);
    for (std::size_t k = 1; k < f.p.size(); ++k) CHECK(f.p[k] > f.p[k - 1]);
    double abs_q = 0.0;
    for (const auto& v : p.q) abs_q += std::abs(v);
    CHECK(f.integral_H() <= abs_q * p.grid.spacing() + 1e-12);
    CHECK(conserved_E1(p) <= abs_q * p.grid.spacing() + 1e-12);
  }
}

TEST_CASE("gauge fields are the entries of -G^{-1} G_x") {
  const Potential p = gaussian(10.0, 1024, {0.4, 0.3}, 1.5);
  const AknsFields f = akns_potentials(p);
  const int k = 530;
  const double h = p.grid.spacing();
  const Mat2 dG = (eigvec_matrix(p.q[k] + 0.5 * h * p.qx[k]) - eigvec_matrix(p.q[k] - 0.5 * h * p.qx[k])) / h;
  const Mat2 V = -f.G[k].inverse() * dG;
  CHECK(std::abs(V(0, 0) - f.B[k]) < 1e-5);
  CHECK(std::abs(V(0, 1) - f.Q[k]) < 1e-5);
  CHECK(std::abs(V(1, 0) + std::conj(f.Q[k])) < 1e-5);
  CHECK(std::abs(V(1, 1) - std::conj(f.B[k])) < 1e-5);
}

TEST_CASE("E1 matches adaptive quadrature") {
  CHECK(conserved_E1(make_potential(SpatialGrid(10.0, 64), CVec(64))) == 0.0);
  const Potential p = gaussian(10.0, 2048, 0.3);
  const double ref = oracle::simpson_panels(
      [](double x) { return std::sqrt(1.0 + 0.09 * std::exp(-2.0 * x * x)) - 1.0; }, -10.0, 10.0, 40, 1e-14);
  CHECK(std::abs(conserved_E1(p) - ref) < 1e-10);
}

TEST_CASE("E2 diagnostic") {
  const Potential zero = make_potential(SpatialGrid(10.0, 64), CVec(64));
  try {
    conserved_E2(zero);
    FAIL("expected diagnostic-unreliable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DiagnosticUnreliable);
  }

  const E2Result real = conserved_E2(gaussian(10.0, 512, 0.5));
  CHECK(std::abs(real.gradient_term.imag()) < 1e-8);
  CHECK(std::abs(real.gradient_term) < 1e-8);  // total derivative of a decaying quantity
}

TEST_CASE("E2 is conserved along the soliton flow") {
  const SolitonParams sp(3.0, 1.0);
  const SpatialGrid g(20.0, 2048);
  const Potential q0 = make_potential(g, soliton_profile(g, 0.0, sp));
  const EvolutionRun run = evolve(q0, 0.25);
  const Potential q1 = make_potential(g, run.final_q);
  const cplx e0 = conserved_E2(q0).value, e1 = conserved_E2(q1).value;
  MESSAGE("E2(0) = " << e0 << ", E2(0.25) = " << e1);
  CHECK(std::abs(e1 - e0) < 1e-3);
}
