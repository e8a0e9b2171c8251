#include "wki/rhp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

namespace wki {

namespace {

using boost::math::quadrature::gauss;

constexpr int idx(int i, int j) { return 2 * i + j; }

bool all_zero(const CVec& v) {
  return std::all_of(v.begin(), v.end(), [](cplx c) { return c == cplx{}; });
}

double field_norm(const MatField& f, double dz, int rows) {
  double sum = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < 2; ++j)
      for (const auto& v : f[idx(i, j)]) sum += std::norm(v);
  return std::sqrt(sum * dz);
}

TailModel fit_tail(const SpectralGrid& g, const CVec& c) {
  const int n = g.size();
  const int inner = n / 8;
  const int nodes[4] = {0, inner, n - 1 - inner, n - 1};
  Eigen::Matrix4cd a;
  Eigen::Vector4cd rhs;
  for (int i = 0; i < 4; ++i) {
    const double l = -1.0 / g.point(nodes[i]);
    double p = l;
    for (int k = 0; k < 4; ++k, p *= l) a(i, k) = p;
    rhs(i) = c[nodes[i]];
  }
  const Eigen::Vector4cd sol = a.partialPivLu().solve(rhs);
  TailModel m;
  for (int k = 0; k < 4; ++k) m.c[k] = sol(k);
  return m;
}

// Tail lambda intervals: (-a, 0) for s beyond the right grid end, (0, b) for
// s beyond the left one. Grid cells have width dz centred on the samples.
std::pair<double, double> tail_extent(const SpectralGrid& g) {
  const double dz = g.spacing();
  const double right = g.point(g.size() - 1) + 0.5 * dz;
  const double left = g.point(0) - 0.5 * dz;
  return {1.0 / right, -1.0 / left};
}

// sum_{k >= 2} c_k lambda^(k - 2): the regular part of c(lambda) / lambda^2.
cplx regular_part(const TailModel& m, double l) {
  return m.c[1] + l * (m.c[2] + l * m.c[3]);
}

// J_p = int over the tail of c(lambda) lambda^(p - 2) E(lambda) dlambda, p = 0, 1, 2
// (ds = dlambda / lambda^2). For p = 0 the c_1 / lambda term is a principal
// value at 0, taken by pairing +-lambda.
cplx tail_integral(const TailModel& m, int p, double a, double b, const auto& e) {
  if (p == 0) {
    const double c = std::min(a, b);
    auto paired = [&](double l) {
      const cplx ep = e(l), em = e(-l);
      return m.c[0] * (ep - em) / l + regular_part(m, l) * ep + regular_part(m, -l) * em;
    };
    auto plain = [&](double l) { return (m.c[0] / l + regular_part(m, l)) * e(l); };
    cplx out = gauss<double, 30>::integrate(paired, 0.0, c);
    if (a > c) out += gauss<double, 30>::integrate(plain, -a, -c);
    if (b > c) out += gauss<double, 30>::integrate(plain, c, b);
    return out;
  }
  auto f = [&](double l) {
    const cplx c1 = m.c[0] + l * regular_part(m, l);  // c(lambda) / lambda
    return (p == 1 ? c1 : c1 * l) * e(l);
  };
  return gauss<double, 30>::integrate(f, -a, 0.0) + gauss<double, 30>::integrate(f, 0.0, b);
}

}  // namespace

MatField zero_field(int n) { return {CVec(n), CVec(n), CVec(n), CVec(n)}; }

MatField identity_field(int n) {
  MatField f = zero_field(n);
  std::fill(f[0].begin(), f[0].end(), cplx{1.0});
  std::fill(f[3].begin(), f[3].end(), cplx{1.0});
  return f;
}

const char* to_string(FactorizationKind kind) {
  return kind == FactorizationKind::Triangular ? "triangular" : "delta-conjugated";
}

const char* to_string(SolverKind kind) { return kind == SolverKind::Neumann ? "neumann" : "dense"; }

double phase(double z, double x_h, double t) {
  require(z != 0.0, "phase: z must be nonzero");
  return x_h / z + 2.0 * t / (z * z);
}

DeltaFunction delta_function(const CauchyProjector& proj, std::span<const cplx> r) {
  const int n = static_cast<int>(r.size());
  CVec log_weight(n);
  cplx total{};
  for (int k = 0; k < n; ++k) {
    log_weight[k] = std::log1p(std::norm(r[k]));
    total += log_weight[k];
  }
  const CVec cp = proj.plus(log_weight);
  DeltaFunction d;
  d.plus.resize(n);
  d.minus.resize(n);
  d.Delta.resize(n);
  for (int k = 0; k < n; ++k) {
    d.plus[k] = std::exp(cp[k]);
    d.minus[k] = std::exp(cp[k] - log_weight[k]);
    d.Delta[k] = 1.0 / (d.plus[k] * d.minus[k]);
  }
  d.kappa = total * proj.grid().spacing() / (2.0 * kPi * kI);
  return d;
}

DeltaFunction delta_function(const SpectralFunction& r, CauchyKernel kernel) {
  return delta_function(CauchyProjector(r.grid, kernel), r.values);
}

namespace {

// (1 / 2 pi i) int_tail c(lambda) lambda^p E(lambda) / (s' - s) ds' at every grid
// point s, with s' = -1 / lambda. In lambda the kernel is -(c / lambda) lambda^p E / (1 + s lambda);
// near the grid ends its pole at lambda = -1/s sits just outside the tail, so
// the pole value is subtracted and integrated in closed form.
CVec tail_cauchy(const SpectralGrid& g, const TailModel& m, int p, const auto& e) {
  const auto [a, b] = tail_extent(g);
  using rule = gauss<double, 30>;
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  auto phi = [&](double l) {
    const cplx c = m.c[0] + l * regular_part(m, l);
    return (p == 1 ? c * l : c) * e(l);
  };
  struct Node {
    double l, w;
    cplx phi;
  };
  const std::array<std::pair<double, double>, 2> ranges{{{-a, 0.0}, {0.0, b}}};
  std::array<std::vector<Node>, 2> nodes;
  for (int r = 0; r < 2; ++r) {
    const auto [lo, hi] = ranges[r];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (double sign : {-1.0, 1.0}) {
        if (xs[i] == 0.0 && sign > 0.0) continue;
        const double l = mid + sign * half * xs[i];
        nodes[r].push_back({l, half * ws[i], phi(l)});
      }
  }
  CVec out(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double s = g.point(k);
    cplx sum{};
    for (int r = 0; r < 2; ++r) {
      const auto [lo, hi] = ranges[r];
      if (std::abs(s) * std::max(std::abs(lo), std::abs(hi)) > 0.5) {
        const cplx pole = phi(-1.0 / s);
        for (const auto& nd : nodes[r]) sum += nd.w * (nd.phi - pole) / (1.0 + s * nd.l);
        sum += pole * std::log((1.0 + s * hi) / (1.0 + s * lo)) / s;
      } else {
        for (const auto& nd : nodes[r]) sum += nd.w * nd.phi / (1.0 + s * nd.l);
      }
    }
    out[k] = -sum / (2.0 * kPi * kI);
  }
  return out;
}

}  // namespace

JumpFactorization build_factorization(const SpectralFunction& r, double x_h, double t,
                                      FactorizationKind kind, const DeltaFunction* delta) {
  require(std::isfinite(x_h) && std::isfinite(t), "build_factorization: x_H and t must be finite");
  const SpectralGrid& g = r.grid;
  const int n = g.size();
  JumpFactorization f{kind, g, x_h, t};
  f.theta.assign(n, 0.0);
  f.w_plus = f.w_minus = f.dw_plus = f.dw_minus = zero_field(n);

  CVec c12(n), c21(n);  // coefficients of exp(-2 i theta), exp(2 i theta)
  if (kind == FactorizationKind::Triangular) {
    for (int k = 0; k < n; ++k) {
      c21[k] = r.values[k];
      c12[k] = std::conj(r.values[k]);
    }
  } else {
    f.delta = delta ? *delta : delta_function(r);
    f.rho.resize(n);
    for (int k = 0; k < n; ++k) {
      f.rho[k] = r.values[k] * f.delta->Delta[k];
      c21[k] = f.rho[k];
      c12[k] = std::conj(f.rho[k]);
    }
  }

  MatField& w12 = kind == FactorizationKind::Triangular ? f.w_minus : f.w_plus;
  MatField& w21 = kind == FactorizationKind::Triangular ? f.w_plus : f.w_minus;
  MatField& dw12 = kind == FactorizationKind::Triangular ? f.dw_minus : f.dw_plus;
  MatField& dw21 = kind == FactorizationKind::Triangular ? f.dw_plus : f.dw_minus;
  for (int k = 0; k < n; ++k) {
    if (r.values[k] == cplx{}) continue;
    const double z = g.point(k);
    const double th = phase(z, x_h, t);
    f.theta[k] = th;
    const cplx e = std::exp(2.0 * kI * th);
    w12[idx(0, 1)][k] = c12[k] * std::conj(e);
    w21[idx(1, 0)][k] = c21[k] * e;
    dw12[idx(0, 1)][k] = (-2.0 * kI / z) * w12[idx(0, 1)][k];
    dw21[idx(1, 0)][k] = (2.0 * kI / z) * w21[idx(1, 0)][k];
  }
  // Both kinds share one tail model built from r, so they agree exactly where
  // their grid parts do.
  CVec rbar(n);
  for (int k = 0; k < n; ++k) rbar[k] = std::conj(r.values[k]);
  f.tail12 = fit_tail(g, rbar);
  f.tail21 = fit_tail(g, r.values);
  const auto e12 = [&](double l) { return std::exp(kI * (2.0 * x_h * l - 4.0 * t * l * l)); };
  const auto e21 = [&](double l) { return std::conj(e12(l)); };
  f.tail_source = f.tail_dsource = zero_field(n);
  f.tail_source[idx(0, 1)] = tail_cauchy(g, f.tail12, 0, e12);
  f.tail_source[idx(1, 0)] = tail_cauchy(g, f.tail21, 0, e21);
  f.tail_dsource[idx(0, 1)] = tail_cauchy(g, f.tail12, 1, e12);
  f.tail_dsource[idx(1, 0)] = tail_cauchy(g, f.tail21, 1, e21);
  for (auto& v : f.tail_dsource[idx(0, 1)]) v *= 2.0 * kI;
  for (auto& v : f.tail_dsource[idx(1, 0)]) v *= -2.0 * kI;
  return f;
}

RhpSolver::RhpSolver(const SpectralGrid& zgrid, RhpOptions opts)
    : zgrid_(zgrid), opts_(opts), proj_(zgrid, opts.cauchy_kernel) {
  require(opts.tolerance > 0.0, "RHP tolerance must be positive");
  require(opts.max_iterations > 0, "RHP iteration cap must be positive");
}

MatField RhpSolver::apply(const JumpFactorization& f, const MatField& u, bool dw) const {
  const int n = zgrid_.size();
  const MatField& wp = dw ? f.dw_plus : f.w_plus;
  const MatField& wm = dw ? f.dw_minus : f.w_minus;
  MatField out = zero_field(n);
  const int rows = opts_.first_row_only ? 1 : 2;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < 2; ++j) {
      CVec both(n), plus_part(n);
      bool any = false;
      for (int l = 0; l < 2; ++l) {
        const CVec& a = wm[idx(l, j)];
        const CVec& b = wp[idx(l, j)];
        const bool za = all_zero(a), zb = all_zero(b);
        if (za && zb) continue;
        any = true;
        const CVec& ul = u[idx(i, l)];
        for (int k = 0; k < n; ++k) {
          const cplx pb = zb ? cplx{} : ul[k] * b[k];
          both[k] += (za ? cplx{} : ul[k] * a[k]) + pb;
          plus_part[k] += pb;
        }
      }
      if (!any) continue;
      // C+(u w-) + C-(u w+) = C+(u w- + u w+) - u w+
      CVec proj = proj_.plus(both);
      for (int k = 0; k < n; ++k) proj[k] -= plus_part[k];
      out[idx(i, j)] = std::move(proj);
    }
  }
  return out;
}

double RhpSolver::residual(const JumpFactorization& f, const MatField& mu) const {
  const int n = zgrid_.size();
  const int rows = opts_.first_row_only ? 1 : 2;
  MatField res = apply(f, mu);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < n; ++k)
        res[idx(i, j)][k] = mu[idx(i, j)][k] - (i == j ? 1.0 : 0.0) - res[idx(i, j)][k] -
                            (opts_.tail_correction ? f.tail_source[idx(i, j)][k] : cplx{});
  return field_norm(res, zgrid_.spacing(), rows);
}

RhpSolver::Solve RhpSolver::neumann(const JumpFactorization& f, const MatField& rhs, bool first) const {
  const int n = zgrid_.size();
  const int rows = first ? 1 : 2;
  MatField u = rhs;
  double diff = 0.0;
  for (int it = 1; it <= opts_.max_iterations; ++it) {
    MatField next = apply(f, u);
    for (int e = 0; e < 4; ++e)
      for (int k = 0; k < n; ++k) next[e][k] += rhs[e][k];
    MatField delta = next;
    for (int e = 0; e < 4; ++e)
      for (int k = 0; k < n; ++k) delta[e][k] -= u[e][k];
    diff = field_norm(delta, zgrid_.spacing(), rows);
    u = std::move(next);
    if (!std::isfinite(diff)) break;
    if (diff < opts_.tolerance) return {std::move(u), diff, it, true};
  }
  return {std::move(u), diff, opts_.max_iterations, false};
}

RhpSolver::Solve RhpSolver::dense(const JumpFactorization& f, const MatField& rhs, bool first) const {
  const int n = zgrid_.size();
  if (n > opts_.dense_cap) {
    std::ostringstream os;
    os << "dense RHP solve needs N_z <= " << opts_.dense_cap << " (got " << n << ")";
    fail(ErrorKind::RhpUnsolved, os.str());
  }
  CVec kern(2 * n - 1);  // C+ Toeplitz entries at lags 1 - n .. n - 1
  for (int d = 1 - n; d < n; ++d) kern[d + n - 1] = proj_.kernel(d);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(2 * n, 2 * n);
  for (int j = 0; j < 2; ++j) {
    for (int l = 0; l < 2; ++l) {
      const CVec& wm = f.w_minus[idx(l, j)];
      const CVec& wp = f.w_plus[idx(l, j)];
      if (all_zero(wm) && all_zero(wp)) continue;
      // out_j[p] -= sum_q K[p - q] (wm + wp)[q] u_l[q] - wp[p] u_l[p]
      for (int q = 0; q < n; ++q) {
        const cplx w = wm[q] + wp[q];
        for (int p = 0; p < n; ++p) a(j * n + p, l * n + q) -= kern[p - q + n - 1] * w;
        a(j * n + q, l * n + q) += wp[q];
      }
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  MatField u = zero_field(n);
  for (int i = 0; i < (first ? 1 : 2); ++i) {
    Eigen::VectorXcd b(2 * n);
    for (int k = 0; k < n; ++k) {
      b(k) = rhs[idx(i, 0)][k];
      b(n + k) = rhs[idx(i, 1)][k];
    }
    const Eigen::VectorXcd x = lu.solve(b);
    for (int k = 0; k < n; ++k) {
      u[idx(i, 0)][k] = x(k);
      u[idx(i, 1)][k] = x(n + k);
    }
  }
  bool ok = true;
  for (const auto& e : u)
    for (const auto& v : e) ok = ok && std::isfinite(v.real()) && std::isfinite(v.imag());
  return {std::move(u), 0.0, 1, ok};
}

RhpSolver::Solve RhpSolver::run(const JumpFactorization& f, const MatField& rhs, SolverKind& used) const {
  const bool first = opts_.first_row_only;
  if (opts_.policy != SolverPolicy::DenseOnly) {
    Solve s = neumann(f, rhs, first);
    used = SolverKind::Neumann;
    if (s.converged || opts_.policy == SolverPolicy::NeumannOnly) return s;
  }
  used = SolverKind::Dense;
  return dense(f, rhs, first);
}

RhpSolution RhpSolver::solve_mu(const JumpFactorization& f) const {
  require(f.zgrid.size() == zgrid_.size(), "factorization grid does not match solver grid");
  const int n = zgrid_.size();
  RhpSolution sol;
  sol.first_row_only = opts_.first_row_only;
  MatField rhs = identity_field(n);
  if (opts_.tail_correction)
    for (int e = 0; e < 4; ++e)
      for (int k = 0; k < n; ++k) rhs[e][k] += f.tail_source[e][k];
  Solve s = run(f, rhs, sol.solver);
  sol.mu = std::move(s.u);
  sol.iterations = s.iterations;
  sol.residual = residual(f, sol.mu);
  if (!s.converged || !(sol.residual < opts_.tolerance)) {
    std::ostringstream os;
    os << "Beals-Coifman solve failed at x_H = " << f.x_h << ", t = " << f.t << " (residual "
       << sol.residual << ", solver " << to_string(sol.solver) << ")";
    fail(ErrorKind::RhpUnsolved, os.str());
  }
  return sol;
}

void RhpSolver::solve_dmu(const JumpFactorization& f, RhpSolution& sol) const {
  const int n = zgrid_.size();
  MatField forcing = apply(f, sol.mu, true);
  if (opts_.tail_correction)
    for (int e = 0; e < 4; ++e)
      for (int k = 0; k < n; ++k) forcing[e][k] += f.tail_dsource[e][k];
  SolverKind used;
  Solve s = run(f, forcing, used);
  sol.dmu = std::move(s.u);
  sol.d_iterations = s.iterations;
  // residual of (I - C_w) dmu = forcing
  const int rows = opts_.first_row_only ? 1 : 2;
  MatField res = apply(f, sol.dmu);
  for (int e = 0; e < 2 * rows; ++e)
    for (int k = 0; k < n; ++k) res[e][k] = sol.dmu[e][k] - forcing[e][k] - res[e][k];
  sol.d_residual = field_norm(res, zgrid_.spacing(), rows);
  if (!s.converged || !(sol.d_residual < opts_.tolerance)) {
    std::ostringstream os;
    os << "derivative solve failed at x_H = " << f.x_h << ", t = " << f.t << " (residual "
       << sol.d_residual << ")";
    fail(ErrorKind::RhpUnsolved, os.str());
  }
}

RhpSolution RhpSolver::solve(const JumpFactorization& f) const {
  RhpSolution sol = solve_mu(f);
  solve_dmu(f, sol);
  sol.m1 = m1_moment(f, sol, opts_.tail_correction);
  sol.dx_m1 = dx_m1(f, sol, opts_.tail_correction);
  return sol;
}

RhpSolution solve_mu(const JumpFactorization& f, const RhpOptions& opts) {
  return RhpSolver(f.zgrid, opts).solve_mu(f);
}

RhpSolution solve_dmu(const JumpFactorization& f, const RhpSolution& sol, const RhpOptions& opts) {
  RhpSolution out = sol;
  RhpSolver(f.zgrid, opts).solve_dmu(f, out);
  return out;
}

namespace {

Mat2 moment(const SpectralGrid& g, const MatField& u, const MatField& wp, const MatField& wm) {
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx sum{};
      for (int l = 0; l < 2; ++l) {
        const CVec& ul = u[idx(i, l)];
        const CVec& a = wp[idx(l, j)];
        const CVec& b = wm[idx(l, j)];
        if (ul.empty()) continue;
        for (int k = 0; k < g.size(); ++k) sum += ul[k] * (a[k] + b[k]);
      }
      out(i, j) = sum;
    }
  return out * (-g.spacing() / (2.0 * kPi * kI));
}

struct TailIntegrals {
  // [p] for p = 0, 1, 2; "12" pairs tail12 with exp(-2 i theta), "21" tail21 with exp(2 i theta).
  std::array<cplx, 3> j12, j21;
  cplx kappa_tail;
};

TailIntegrals tail_integrals(const JumpFactorization& f) {
  const auto [a, b] = tail_extent(f.zgrid);
  const double xh = f.x_h, t = f.t;
  // -2 theta at z = -1/lambda is 2 x_H lambda - 4 t lambda^2.
  auto e12 = [&](double l) { return std::exp(kI * (2.0 * xh * l - 4.0 * t * l * l)); };
  auto e21 = [&](double l) { return std::exp(-kI * (2.0 * xh * l - 4.0 * t * l * l)); };
  TailIntegrals ti;
  for (int p = 0; p < 3; ++p) {
    ti.j12[p] = tail_integral(f.tail12, p, a, b, e12);
    ti.j21[p] = tail_integral(f.tail21, p, a, b, e21);
  }
  // log(1 + |r|^2) ~ c21 c12 (the next term is below 1e-9 relative for small data),
  // integrated in z: dz = dlambda / lambda^2.
  auto mass = [&](double l) {
    const cplx c21 = f.tail21.c[0] + l * regular_part(f.tail21, l);
    const cplx c12 = f.tail12.c[0] + l * regular_part(f.tail12, l);
    return c21 * c12;  // (c21 / lambda) (c12 / lambda)
  };
  ti.kappa_tail = (gauss<double, 30>::integrate(mass, -a, 0.0) + gauss<double, 30>::integrate(mass, 0.0, b)) /
                  (2.0 * kPi * kI);
  return ti;
}

const cplx kMomentFactor = -1.0 / (2.0 * kPi * kI);

cplx full_kappa(const JumpFactorization& f, const TailIntegrals* ti) {
  return f.delta->kappa + (ti ? ti->kappa_tail : cplx{});
}

// Gauss nodes on the tail, graded toward lambda = 0 where the diagonal
// integrands carry a log singularity.
struct TailNode {
  double l, w;
};

std::vector<TailNode> graded_nodes(double a, double b) {
  std::vector<TailNode> out;
  using rule = gauss<double, 15>;
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (double sign : {-1.0, 1.0}) {
        if (xs[i] == 0.0 && sign > 0.0) continue;
        out.push_back({mid + sign * half * xs[i], half * ws[i]});
      }
  };
  for (double end : {-a, b}) {
    double outer = end;
    for (int k = 0; k < 5; ++k, outer /= 8.0) panel(std::min(outer / 8.0, outer), std::max(outer / 8.0, outer));
    panel(std::min(0.0, outer), std::max(0.0, outer));
  }
  return out;
}

// Off-diagonal entry (i, 1 - i) of mu (or of d mu / dx_H) at the tail nodes, to
// first order: the grid's Cauchy sum plus the tail's own boundary value.
CVec tail_offdiagonal(const JumpFactorization& f, const RhpSolution& sol, int i, bool derivative,
                      const std::vector<TailNode>& nodes, double a, double b) {
  const SpectralGrid& g = f.zgrid;
  const int n = g.size(), j = 1 - i;
  CVec density(n, cplx{});
  for (int l = 0; l < 2; ++l) {
    const CVec& u = derivative ? sol.dmu[idx(i, l)] : sol.mu[idx(i, l)];
    for (int k = 0; k < n; ++k) {
      const cplx w = f.w_plus[idx(l, j)][k] + f.w_minus[idx(l, j)][k];
      density[k] += u[k] * w;
      if (derivative) density[k] += sol.mu[idx(i, l)][k] * (f.dw_plus[idx(l, j)][k] + f.dw_minus[idx(l, j)][k]);
    }
  }
  const TailModel& m = i == 0 ? f.tail12 : f.tail21;
  const double sgn = i == 0 ? 1.0 : -1.0;  // exp(-2 i theta) for (1,2), exp(2 i theta) for (2,1)
  auto phi = [&](double l) {
    const cplx c = m.c[0] + l * regular_part(m, l);  // c / lambda
    const cplx e = std::exp(sgn * kI * (2.0 * f.x_h * l - 4.0 * f.t * l * l));
    return derivative ? c * e * (sgn * 2.0 * kI * l) : c * e;
  };
  // C+ carries +1/2 of the density, C- carries -1/2.
  const bool in_minus = i == 0 ? f.kind == FactorizationKind::Triangular : f.kind == FactorizationKind::DeltaConjugated;
  const double half = in_minus ? 0.5 : -0.5;
  CVec phis(nodes.size());
  for (std::size_t q = 0; q < nodes.size(); ++q) phis[q] = phi(nodes[q].l);
  CVec out(nodes.size());
  const double dz = g.spacing();
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    const double l = nodes[q].l, s = -1.0 / l;
    cplx bulk{};
    for (int k = 0; k < n; ++k)
      if (density[k] != cplx{}) bulk += density[k] / (g.point(k) - s);
    bulk *= dz;
    // Tail part in lambda: lambda PV int phi(l') / (l' - l) dl', pole value subtracted.
    cplx pv = phis[q] * std::log((b - l) / (l + a));
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      if (p == q) {
        const double step = 1e-6 * (a + b);
        pv += nodes[p].w * (phi(l + step) - phi(l - step)) / (2.0 * step);
      } else {
        pv += nodes[p].w * (phis[p] - phis[q]) / (nodes[p].l - l);
      }
    }
    out[q] = (bulk + l * pv) / (2.0 * kPi * kI) + half * l * phis[q];
  }
  return out;
}

// Diagonal tail moments K int_tail mu_i,1-i w_1-i,i ds (and their x_H derivatives).
std::pair<Mat2, Mat2> diagonal_tail(const JumpFactorization& f, const RhpSolution& sol, bool derivative) {
  const auto [a, b] = tail_extent(f.zgrid);
  const std::vector<TailNode> nodes = graded_nodes(a, b);
  Mat2 m = Mat2::Zero(), d = Mat2::Zero();
  const int rows = sol.first_row_only ? 1 : 2;
  for (int i = 0; i < rows; ++i) {
    const CVec mu = tail_offdiagonal(f, sol, i, false, nodes, a, b);
    CVec dmu;
    if (derivative) dmu = tail_offdiagonal(f, sol, i, true, nodes, a, b);
    // w_(1-i, i) = c(lambda) exp(+-2 i theta); ds = dlambda / lambda^2
    const TailModel& c = i == 0 ? f.tail21 : f.tail12;
    const double sgn = i == 0 ? -1.0 : 1.0;
    cplx sm{}, sd{};
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double l = nodes[q].l;
      const cplx w = (c.c[0] + l * regular_part(c, l)) *  // w / lambda
                     std::exp(sgn * kI * (2.0 * f.x_h * l - 4.0 * f.t * l * l));
      sm += nodes[q].w * mu[q] * w / l;
      if (derivative) sd += nodes[q].w * (dmu[q] + mu[q] * (sgn * 2.0 * kI * l)) * w / l;
    }
    m(i, i) = kMomentFactor * sm;
    d(i, i) = kMomentFactor * sd;
  }
  return {m, d};
}

// Moment of the factorization's own unknown (m1~ for DeltaConjugated, m1 otherwise).
Mat2 tilde_moment(const JumpFactorization& f, const RhpSolution& sol, const TailIntegrals* ti) {
  Mat2 m = moment(f.zgrid, sol.mu, f.w_plus, f.w_minus);
  if (!ti) return m;
  const cplx K = kMomentFactor;
  Mat2 lin = m + diagonal_tail(f, sol, false).first;
  lin(0, 1) += K * ti->j12[0];
  lin(1, 0) += K * ti->j21[0];
  const cplx g = f.kind == FactorizationKind::DeltaConjugated ? 2.0 * full_kappa(f, ti) : cplx{};
  m = lin;
  // The diagonal of mu carries an |r|^2-type density, so mu_jj ~ 1 - m1~_jj lambda
  // holds in the tail. The off-diagonal densities decay only like 1/z, hence
  // the explicit tail evaluation in diagonal_tail.
  m(0, 1) += K * (g - lin(0, 0)) * ti->j12[1];
  m(1, 0) += K * (-g - lin(1, 1)) * ti->j21[1];
  return m;
}

}  // namespace

Mat2 m1_moment(const JumpFactorization& f, const RhpSolution& sol, bool tail_correction) {
  const TailIntegrals ti = tail_correction ? tail_integrals(f) : TailIntegrals{};
  const TailIntegrals* tp = tail_correction ? &ti : nullptr;
  Mat2 m = tilde_moment(f, sol, tp);
  if (f.kind == FactorizationKind::DeltaConjugated) {
    const cplx kappa = full_kappa(f, tp);
    m(0, 0) -= kappa;
    m(1, 1) += kappa;
  }
  if (sol.first_row_only) m.row(1).setZero();
  return m;
}

Mat2 dx_m1(const JumpFactorization& f, const RhpSolution& sol, bool tail_correction) {
  Mat2 d = moment(f.zgrid, sol.dmu, f.w_plus, f.w_minus) + moment(f.zgrid, sol.mu, f.dw_plus, f.dw_minus);
  if (tail_correction) {
    const TailIntegrals ti = tail_integrals(f);
    const Mat2 mt = tilde_moment(f, sol, &ti);
    const cplx K = kMomentFactor;
    Mat2 lin = d + diagonal_tail(f, sol, true).second;
    lin(0, 1) += K * 2.0 * kI * ti.j12[1];
    lin(1, 0) += K * -2.0 * kI * ti.j21[1];
    const cplx g = f.kind == FactorizationKind::DeltaConjugated ? 2.0 * full_kappa(f, &ti) : cplx{};
    d = lin;
    d(0, 1) += K * (-lin(0, 0) * ti.j12[1] + (g - mt(0, 0)) * 2.0 * kI * ti.j12[2]);
    d(1, 0) += K * (-lin(1, 1) * ti.j21[1] + (-g - mt(1, 1)) * -2.0 * kI * ti.j21[2]);
  }
  if (sol.first_row_only) d.row(1).setZero();
  return d;
}

}  // namespace wki
