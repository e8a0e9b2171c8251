#include "wki/potentials.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wki/io.hpp"
#include "wki/reconstruction.hpp"
#include "wki/soliton.hpp"

namespace wki {

double PotentialSpec::get(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

CVec from_file(const std::string& path, const SpatialGrid& grid) {
  const auto rows = read_csv(path);
  require(rows.size() >= 4, "potential file needs at least four rows: " + path);
  RVec x, re, im;
  for (const auto& row : rows) {
    require(row.size() >= 3, "potential file rows need x, re, im: " + path);
    if (!x.empty()) require(row[0] > x.back(), "potential file x column must increase: " + path);
    x.push_back(row[0]);
    re.push_back(row[1]);
    im.push_back(row[2]);
  }
  const MonotoneCubic fr(x, re), fi(x, std::move(im));
  CVec q(grid.size());
  for (int k = 0; k < grid.size(); ++k) q[k] = {fr(grid.point(k)), fi(grid.point(k))};
  return q;
}

const std::map<std::string, std::map<std::string, double>>& family_defaults() {
  static const std::map<std::string, std::map<std::string, double>> d{
      {"zero", {}},
      {"gaussian", {{"amplitude", 0.05}, {"width", 1.0}, {"center", 0.0}, {"wavenumber", 0.0}}},
      {"sech", {{"amplitude", 2.0}, {"width", 1.0}, {"center", 0.0}}},
      {"box", {{"amplitude", 0.05}, {"half_width", 1.0}, {"center", 0.0}}},
      {"soliton", {{"xi", 3.0}, {"eta", 1.0}, {"t", 0.0}}},
      {"file", {}}};
  return d;
}

}  // namespace

std::map<std::string, double> effective_params(const PotentialSpec& spec) {
  const auto& all = family_defaults();
  const auto it = all.find(spec.family);
  if (it == all.end()) fail(ErrorKind::InvalidArgument, "unknown potential family '" + spec.family + "'");
  auto out = it->second;
  for (const auto& [k, v] : spec.params) {
    if (!out.contains(k)) fail(ErrorKind::InvalidArgument, "potential family '" + spec.family + "' has no parameter '" + k + "'");
    out[k] = v;
  }
  return out;
}

CVec sample_potential(const PotentialSpec& spec, const SpatialGrid& grid) {
  const int n = grid.size();
  CVec q(n);
  (void)effective_params(spec);
  const std::string& f = spec.family;
  if (f == "zero") return q;
  if (f == "gaussian") {
    const double a = spec.get("amplitude", 0.05), w = spec.get("width", 1.0);
    const double c = spec.get("center", 0.0), kw = spec.get("wavenumber", 0.0);
    require(w > 0.0, "gaussian width must be positive");
    for (int k = 0; k < n; ++k) {
      const double x = grid.point(k), u = (x - c) / w;
      q[k] = a * std::exp(cplx{-u * u, kw * x});
    }
    return q;
  }
  if (f == "sech") {
    const double a = spec.get("amplitude", 2.0), w = spec.get("width", 1.0), c = spec.get("center", 0.0);
    require(w > 0.0, "sech width must be positive");
    for (int k = 0; k < n; ++k) q[k] = a / std::cosh((grid.point(k) - c) / w);
    return q;
  }
  if (f == "box") {
    const double a = spec.get("amplitude", 0.05), hw = spec.get("half_width", 1.0), c = spec.get("center", 0.0);
    for (int k = 0; k < n; ++k) q[k] = std::abs(grid.point(k) - c) <= hw ? a : 0.0;
    return q;
  }
  if (f == "soliton") {
    const SolitonParams p(spec.get("xi", 3.0), spec.get("eta", 1.0));
    return soliton_profile(grid, spec.get("t", 0.0), p);
  }
  if (f == "file") {
    require(!spec.file.empty(), "file potential needs a path");
    return from_file(spec.file, grid);
  }
  fail(ErrorKind::InvalidArgument, "unknown potential family '" + f + "'");
}

Potential build_potential(const PotentialSpec& spec, const SpatialGrid& grid) {
  const auto method = spec.family == "box" ? DerivativeMethod::CenteredDifference : DerivativeMethod::Spectral;
  return make_potential(grid, sample_potential(spec, grid), method);
}

}  // namespace wki
