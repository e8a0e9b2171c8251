#include <doctest.h>

#include "oracles.hpp"
#include "wki/soliton.hpp"

using namespace wki;

TEST_CASE("parameters") {
  const SolitonParams p(3.0, 1.0);
  CHECK(p.K() == 10.0);
  CHECK(p.alpha() == doctest::Approx(std::atan(1.0 / 3.0)));
  CHECK_FALSE(p.bursting());
  CHECK(SolitonParams(1.0, 1.0).bursting());
  CHECK(SolitonParams(-2.0, 2.0).bursting());
  CHECK_THROWS_AS(SolitonParams(1.0, 0.0), Error);
  CHECK_THROWS_AS(SolitonParams(1.0, -1.0), Error);
}

TEST_CASE("epsilon root") {
  const SolitonParams p(3.0, 1.0);
  CHECK(soliton_epsilon(-50.0, 0.0, p) < 1e-12);
  CHECK(std::abs(soliton_epsilon(50.0, 0.0, p) - p.eps_max()) < 1e-12);

  const long double eta = 1.0L, K = 10.0L;
  auto g = [&](long double e) { return e - eta / K * (std::tanh(2.0L * eta * e) + 1.0L); };
  const long double ref = oracle::scan_bisect(g, 0.0L, 2.0L * eta / K, 1000000);
  CHECK(std::abs(soliton_epsilon(0.0, 0.0, p) - static_cast<double>(ref)) < 1e-12);

  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const SolitonParams r(u(oracle::rng()), 0.2 + std::abs(u(oracle::rng())));
    const double x = u(oracle::rng()), t = std::abs(u(oracle::rng())) * 0.1;
    const double e = soliton_epsilon(x, t, r);
    CHECK(e >= 0.0);
    CHECK(e <= r.eps_max());
    CHECK(std::abs(e - r.eta / r.K() * (std::tanh(2.0 * r.eta * (x - 4.0 * r.xi * t + e)) + 1.0)) < 1e-12);
  }
  // Bursting parameters still bracket.
  const SolitonParams b(1.0, 1.0);
  const double e = soliton_epsilon(0.3, 0.0, b);
  CHECK(std::abs(e - 0.5 * (std::tanh(2.0 * (0.3 + e)) + 1.0)) < 1e-12);
}

TEST_CASE("profile peak and decay") {
  const SolitonParams p(3.0, 1.0);
  double peak = 0.0, star_at_peak = 1.0;
  for (double x = -3.0; x <= 3.0; x += 1e-4) {
    const SolitonSample s = soliton_sample(x, 0.0, p);
    const double a = std::abs(std::get<cplx>(s.q));
    if (a > peak) {
      peak = a;
      star_at_peak = s.star;
    }
  }
  CHECK(std::abs(peak - 0.75) < 1e-6);
  CHECK(std::abs(star_at_peak) < 1e-3);
  CHECK(std::abs(std::sqrt(soliton_amplitude_sq(0.0, p)) - 0.75) < 1e-15);
  // Exactly at * = 0.
  const double x0 = soliton_x_from_star(0.0, 0.0, p);
  CHECK(std::abs(std::abs(std::get<cplx>(soliton_q(x0, 0.0, p))) - 0.75) < 1e-12);

  CHECK(std::abs(std::get<cplx>(soliton_q(-30.0, 0.0, p))) < 1e-20);
  CHECK(std::abs(std::get<cplx>(soliton_q(30.0, 0.0, p))) < 1e-20);
}

TEST_CASE("amplitude identity") {
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const SolitonParams p(3.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(oracle::rng()), t = 0.05 * std::abs(u(oracle::rng()));
    const SolitonSample s = soliton_sample(x, t, p);
    CHECK(std::abs(std::norm(std::get<cplx>(s.q)) - soliton_amplitude_sq(s.star, p)) < 1e-10);
    CHECK(std::abs(s.x_h - x - s.eps) < 1e-15);
  }
}

TEST_CASE("bursting soliton") {
  const SolitonParams p(1.0, 1.0);
  const double x0 = soliton_x_from_star(0.0, 0.0, p);
  CHECK(std::holds_alternative<AtSingularity>(soliton_q(x0, 0.0, p)));
  double prev = 0.0;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double a = std::abs(std::get<cplx>(soliton_q(soliton_x_from_star(d, 0.0, p), 0.0, p)));
    CHECK(a > prev);
    prev = a;
  }
  CHECK(prev > 1e3);
  CHECK(x0 == -0.5);
  CHECK(std::holds_alternative<AtSingularity>(soliton_qh(0.0, 0.0, p)));
  CHECK_THROWS_AS(soliton_profile(SpatialGrid(4.0, 16), 0.0, p), Error);  // grid contains x = -0.5
}

TEST_CASE("moment entries") {
  const SolitonParams p(3.0, 1.0);
  const auto [m12, m11] = soliton_m1_entries(0.0, 0.0, p);
  CHECK(std::abs(m11 - cplx{0.0, 0.1}) < 1e-15);
  const auto far = soliton_m1_entries(-40.0, 0.0, p);
  CHECK(std::abs(far.first) < 1e-30);
  CHECK(std::abs(far.second) < 1e-30);

  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double xh = u(oracle::rng()), t = 0.1 * std::abs(u(oracle::rng()));
    const cplx m = soliton_m1_entries(xh, t, p).second;
    CHECK(std::abs(m.real()) < 1e-12);
    CHECK(m.imag() >= 0.0);
    CHECK(m.imag() <= p.eps_max());

    const double step = 1e-5;
    const cplx fd = (soliton_m1_entries(xh + step, t, p).first - soliton_m1_entries(xh - step, t, p).first) / (2.0 * step);
    CHECK(std::abs(fd - soliton_dm12(xh, t, p)) < 1e-8);

    // eps = -i m1_11 at x_H = x + eps.
    const double x = u(oracle::rng());
    const SolitonSample s = soliton_sample(x, t, p);
    CHECK(std::abs(s.eps - (-kI * soliton_m1_entries(s.x_h, t, p).second).real()) < 1e-10);
  }
}

TEST_CASE("traveling structure in x_H") {
  const SolitonParams p(3.0, 1.0);
  for (double t : {0.1, 0.25, 1.0})
    for (double xh = -2.0; xh <= 2.0; xh += 0.37) {
      const double a = std::abs(std::get<cplx>(soliton_qh(xh + 4.0 * p.xi * t, t, p)));
      const double b = std::abs(std::get<cplx>(soliton_qh(xh, 0.0, p)));
      CHECK(std::abs(a - b) < 1e-13);
    }
}

TEST_CASE("PDE residual decays at second order") {
  const SolitonParams p(3.0, 1.0);
  const ResidualReport rep = soliton_pde_residual(p, SpatialGrid(8.0, 256), 0.0, 4);
  REQUIRE(rep.ratios.size() == 3);
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    MESSAGE("h " << rep.levels[i].h << " residual " << rep.levels[i].max_residual << " ratio " << rep.ratios[i]);
    CHECK(rep.ratios[i] >= 3.5);
  }

  const ResidualReport tiny = soliton_pde_residual(SolitonParams(0.0, 1e-9), SpatialGrid(8.0, 128), 0.0, 2);
  for (const auto& l : tiny.levels) CHECK(l.max_residual < 1e-6);
}
