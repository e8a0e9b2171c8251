#include "wki/pipelines.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <fftw3.h>
#include <sstream>

#include "wki/soliton.hpp"

namespace wki {

namespace fs = std::filesystem;

json to_json(const RunConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : effective_params(c.potential)) params[k] = v;
  return {{"pipeline", c.pipeline},
          {"grid",
           {{"L", c.grid.L},
            {"N", c.grid.N},
            {"Z", c.grid.Z},
            {"N_z", c.grid.N_z},
            {"z_min", c.grid.z_min},
            {"padding", c.grid.padding}}},
          {"potential", {{"family", c.potential.family}, {"params", params}, {"file", c.potential.file}}},
          {"time", {{"t", c.time.t}, {"dt", c.time.dt}, {"cfl", c.time.cfl}}},
          {"tolerances",
           {{"rhp", c.tolerances.rhp},
            {"min_abs_a", c.tolerances.min_abs_a},
            {"slope_margin", c.tolerances.slope_margin},
            {"fixed_point", c.tolerances.fixed_point},
            {"magnus_bound", c.tolerances.magnus_bound},
            {"blowup_guard", c.tolerances.blowup_guard}}},
          {"soliton", {{"xi", c.soliton.xi}, {"eta", c.soliton.eta}}},
          {"input", c.input},
          {"output", c.output},
          {"threads", c.threads}};
}

json default_config_json() {
  json j = to_json(RunConfig{});
  j["potential"]["params"] = json::object();  // filled per family
  return j;
}

namespace {

void check_keys(const json& given, const json& known, const std::string& prefix) {
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) fail(ErrorKind::InvalidArgument, "unknown config key '" + path + "'");
    if (value.is_object() && path != "potential.params") check_keys(value, known.at(key), path);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::InvalidArgument, "config key '" + where + "." + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig config_from_json(const json& user) {
  require(user.is_object(), "config must be a JSON object");
  json j = default_config_json();
  check_keys(user, j, "");
  if (user.contains("potential") && user["potential"].contains("params"))
    j["potential"]["params"] = json::object();  // replace, not merge, the family parameters
  j.merge_patch(user);

  RunConfig c;
  c.pipeline = get<std::string>(j, "pipeline", "");
  const auto& g = j["grid"];
  c.grid = {get<double>(g, "L", "grid"),      get<int>(g, "N", "grid"),         get<double>(g, "Z", "grid"),
            get<int>(g, "N_z", "grid"),       get<double>(g, "z_min", "grid"), get<int>(g, "padding", "grid")};
  const auto& p = j["potential"];
  c.potential.family = get<std::string>(p, "family", "potential");
  c.potential.file = get<std::string>(p, "file", "potential");
  for (const auto& [k, v] : p["params"].items()) {
    require(v.is_number(), "potential parameter '" + k + "' must be a number");
    c.potential.params[k] = v.get<double>();
  }
  const auto& t = j["time"];
  if (t["t"].is_number())
    c.time.t = {t["t"].get<double>()};
  else
    c.time.t = get<std::vector<double>>(t, "t", "time");
  c.time.dt = get<double>(t, "dt", "time");
  c.time.cfl = get<double>(t, "cfl", "time");
  const auto& tol = j["tolerances"];
  c.tolerances = {get<double>(tol, "rhp", "tolerances"),          get<double>(tol, "min_abs_a", "tolerances"),
                  get<double>(tol, "slope_margin", "tolerances"), get<double>(tol, "fixed_point", "tolerances"),
                  get<double>(tol, "magnus_bound", "tolerances"), get<double>(tol, "blowup_guard", "tolerances")};
  c.soliton = {get<double>(j["soliton"], "xi", "soliton"), get<double>(j["soliton"], "eta", "soliton")};
  c.input = get<std::string>(j, "input", "");
  c.output = get<std::string>(j, "output", "");
  c.threads = get<int>(j, "threads", "");
  validate(c);
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> pipelines{"forward", "evolve", "inverse", "roundtrip", "compare-pde", "soliton"};
  require(std::find(pipelines.begin(), pipelines.end(), c.pipeline) != pipelines.end(),
          "unknown pipeline '" + c.pipeline + "'");
  (void)SpatialGrid(c.grid.L, c.grid.N);
  (void)SpectralGrid(c.grid.Z, c.grid.N_z, c.grid.z_min, c.grid.padding);
  const auto& t = c.tolerances;
  for (double v : {t.rhp, t.min_abs_a, t.slope_margin, t.fixed_point, t.magnus_bound, t.blowup_guard, c.time.cfl})
    require(v > 0.0 && std::isfinite(v), "tolerances must be positive and finite");
  require(!c.time.t.empty(), "time.t needs at least one value");
  for (double v : c.time.t) require(std::isfinite(v) && v >= 0.0, "times must be finite and nonnegative");
  require(c.time.dt >= 0.0, "time.dt must be nonnegative");
  if (c.pipeline == "inverse") {
    require(!c.input.empty(), "inverse pipeline needs 'input' (a scattering JSON)");
    require(fs::exists(c.input), "input file does not exist: " + c.input);
  }
  (void)effective_params(c.potential);
  if (c.potential.family == "file") require(fs::exists(c.potential.file), "potential file does not exist: " + c.potential.file);
  if (c.pipeline == "soliton") (void)SolitonParams(c.soliton.xi, c.soliton.eta);
  require(c.threads >= 0, "threads must be nonnegative");
}

int exit_status(ErrorKind kind) {
  if (kind == ErrorKind::InvalidArgument) return 2;
  return is_regime_error(kind) ? 3 : 4;
}

namespace {

SpatialGrid spatial(const RunConfig& c) { return {c.grid.L, c.grid.N}; }
SpectralGrid spectral(const RunConfig& c) { return {c.grid.Z, c.grid.N_z, c.grid.z_min, c.grid.padding}; }

ScatteringOptions scattering_options(const RunConfig& c) {
  ScatteringOptions o;
  o.propagation.local_error_bound = c.tolerances.magnus_bound;
  o.min_abs_a = c.tolerances.min_abs_a;
  return o;
}

InverseOptions inverse_options(const RunConfig& c) {
  InverseOptions o;
  o.rhp.tolerance = c.tolerances.rhp;
  o.slope_margin = c.tolerances.slope_margin;
  o.fixed_point.tolerance = c.tolerances.fixed_point;
  o.threads = c.threads;
  return o;
}

fs::path out_dir(const RunConfig& c) {
  fs::path p(c.output);
  fs::create_directories(p);
  return p;
}

std::string tag(double t) {
  std::ostringstream os;
  os << "t" << t;
  return os.str();
}

double sup_diff(const CVec& a, const CVec& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double l2_diff(const CVec& a, const CVec& b, double h) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s * h);
}

json potential_diagnostics(const Potential& p) {
  json d = {{"sup_norm", p.sup_norm}, {"x1_norm", p.x1_norm()}, {"E1", conserved_E1(p)}};
  try {
    const auto e2 = conserved_E2(p);
    d["E2"] = {{"re", e2.value.real()}, {"im", e2.value.imag()}, {"excluded_fraction", e2.excluded_fraction}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DiagnosticUnreliable) throw;
    d["E2"] = nullptr;
  }
  return d;
}

struct Forward {
  Potential potential;
  ScatteringData sd;
};

Forward forward_stage(const RunConfig& c, const fs::path& dir, json& files) {
  const SpatialGrid g = spatial(c);
  Potential p = build_potential(c.potential, g);
  write_complex_csv(dir / "potential.csv", "x", g.points(), p.q);
  files.push_back("potential.csv");
  ScatteringData sd = reflection_coefficient(p, spectral(c), scattering_options(c));
  write_complex_csv(dir / "reflection.csv", "z", sd.zgrid.points(), sd.r);
  write_json(dir / "scattering.json", to_json(sd));
  files.push_back("reflection.csv");
  files.push_back("scattering.json");
  return {std::move(p), std::move(sd)};
}

json inverse_stage(const ScatteringData& sd, double t, const RunConfig& c, const fs::path& dir, json& files,
                   const std::string& prefix, CVec* q_out = nullptr) {
  const SpatialGrid g = spatial(c);
  const ReconstructionResult rec = inverse_transform(sd, t, g, inverse_options(c));
  const std::string name = prefix + "_" + tag(t);
  write_complex_csv(dir / (name + ".csv"), "x", g.points(), rec.q);
  write_cell_log(dir / ("cells_" + tag(t) + ".csv"), rec.cells);
  RVec eps_gap(rec.eps.size());
  for (std::size_t k = 0; k < eps_gap.size(); ++k) eps_gap[k] = rec.eps_explicit[k] - rec.eps[k];
  write_csv(dir / ("hodograph_" + tag(t) + ".csv"), {"x", "eps_fixed_point", "eps_explicit", "gap"},
            {g.points(), rec.eps, rec.eps_explicit, eps_gap});
  files.push_back(name + ".csv");
  files.push_back("cells_" + tag(t) + ".csv");
  files.push_back("hodograph_" + tag(t) + ".csv");
  if (q_out) *q_out = rec.q;
  return diagnostics_json(rec);
}

json scattering_diagnostics(const ScatteringData& sd) { return to_json(sd)["diagnostics"]; }

}  // namespace

json run_forward(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const Forward f = forward_stage(c, dir, files);
  return {{"potential", potential_diagnostics(f.potential)}, {"scattering", scattering_diagnostics(f.sd)}, {"files", files}};
}

json run_evolve(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const Forward f = forward_stage(c, dir, files);
  json per_t = json::array();
  for (double t : c.time.t) per_t.push_back(inverse_stage(f.sd, t, c, dir, files, "q"));
  return {{"potential", potential_diagnostics(f.potential)},
          {"scattering", scattering_diagnostics(f.sd)},
          {"reconstruction", per_t},
          {"files", files}};
}

json run_inverse(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const ScatteringData sd = scattering_from_json(read_json(c.input));
  json per_t = json::array();
  for (double t : c.time.t) per_t.push_back(inverse_stage(sd, t, c, dir, files, "q"));
  return {{"scattering", scattering_diagnostics(sd)}, {"reconstruction", per_t}, {"files", files}};
}

json run_roundtrip(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const Forward f = forward_stage(c, dir, files);
  CVec q;
  json rec = inverse_stage(f.sd, 0.0, c, dir, files, "reconstructed", &q);
  const double e1 = conserved_E1(f.potential);
  const double h = f.potential.grid.spacing();
  json err = {{"sup", sup_diff(q, f.potential.q)},
              {"l2", l2_diff(q, f.potential.q, h)},
              {"route_gap", rec["route_gap"]},
              {"eps_infinity_minus_mass_qh", rec["eps_infinity"].get<double>() - rec["mass_qh"].get<double>()},
              {"eps_infinity_minus_E1", rec["eps_infinity"].get<double>() - e1}};
  return {{"potential", potential_diagnostics(f.potential)},
          {"scattering", scattering_diagnostics(f.sd)},
          {"reconstruction", rec},
          {"error", err},
          {"files", files}};
}

json run_compare_pde(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const Forward f = forward_stage(c, dir, files);
  const double t_max = *std::max_element(c.time.t.begin(), c.time.t.end());
  EvolveOptions eo;
  eo.cfl = c.time.cfl;
  eo.blowup_guard = c.tolerances.blowup_guard;
  eo.snapshot_times = c.time.t;
  const EvolutionRun run = evolve(f.potential, t_max, c.time.dt, eo);
  write_json(dir / "pde_summary.json", summary_json(run));
  files.push_back("pde_summary.json");
  const SpatialGrid g = spatial(c);
  json per_t = json::array();
  for (std::size_t i = 0; i < c.time.t.size(); ++i) {
    const double t = c.time.t[i];
    CVec q_ist;
    json rec = inverse_stage(f.sd, t, c, dir, files, "ist", &q_ist);
    const CVec& q_pde = run.snapshots[i];
    write_complex_csv(dir / ("pde_" + tag(t) + ".csv"), "x", g.points(), q_pde);
    files.push_back("pde_" + tag(t) + ".csv");
    const ScatteringData rescattered = reflection_coefficient(make_potential(g, q_pde), f.sd.zgrid, scattering_options(c));
    const ScatteringData evolved = evolve_reflection(f.sd, t);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < evolved.r.size(); ++k) {
      num += std::norm(rescattered.r[k] - evolved.r[k]);
      den += std::norm(evolved.r[k]);
    }
    per_t.push_back({{"t", t},
                     {"sup_difference", sup_diff(q_ist, q_pde)},
                     {"l2_difference", l2_diff(q_ist, q_pde, g.spacing())},
                     {"rescatter_relative_l2", den > 0.0 ? std::sqrt(num / den) : std::sqrt(num)},
                     {"reconstruction", rec}});
  }
  return {{"potential", potential_diagnostics(f.potential)},
          {"scattering", scattering_diagnostics(f.sd)},
          {"pde", summary_json(run)},
          {"comparison", per_t},
          {"files", files}};
}

json run_soliton(const RunConfig& c) {
  const fs::path dir = out_dir(c);
  json files = json::array();
  const SolitonParams p(c.soliton.xi, c.soliton.eta);
  const SpatialGrid g = spatial(c);
  json per_t = json::array();
  for (double t : c.time.t) {
    RVec x = g.points(), ab(g.size()), re(g.size()), im(g.size());
    double peak = 0.0;
    int singular = 0;
    for (int k = 0; k < g.size(); ++k) {
      const auto v = soliton_q(x[k], t, p);
      if (const auto* q = std::get_if<cplx>(&v)) {
        ab[k] = std::abs(*q);
        re[k] = q->real();
        im[k] = q->imag();
        peak = std::max(peak, ab[k]);
      } else {
        ab[k] = std::numeric_limits<double>::infinity();
        re[k] = im[k] = std::numeric_limits<double>::quiet_NaN();
        ++singular;
      }
    }
    const std::string name = "soliton_" + tag(t) + ".csv";
    write_csv(dir / name, {"x", "abs", "re", "im"}, {x, ab, re, im});
    files.push_back(name);
    json d = {{"t", t}, {"sampled_peak", peak}, {"singular_samples", singular}};
    d["closed_form_peak"] = p.bursting() ? json(nullptr) : json(std::sqrt(soliton_amplitude_sq(0.0, p)));
    per_t.push_back(d);
  }
  return {{"bursting", p.bursting()}, {"eps_max", p.eps_max()}, {"samples", per_t}, {"files", files}};
}

json run_pipeline(const RunConfig& c) {
  validate(c);
  const fs::path dir = out_dir(c);
  json manifest = {{"program", "wki"},
                   {"version", "0.1.0"},
                   {"versions",
                    {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"fftw", std::string(fftw_version)},
                     {"compiler", __VERSION__}}},
                   {"config", to_json(c)}};
  try {
    json d;
    if (c.pipeline == "forward") d = run_forward(c);
    else if (c.pipeline == "evolve") d = run_evolve(c);
    else if (c.pipeline == "inverse") d = run_inverse(c);
    else if (c.pipeline == "roundtrip") d = run_roundtrip(c);
    else if (c.pipeline == "compare-pde") d = run_compare_pde(c);
    else d = run_soliton(c);
    manifest["files"] = d["files"];
    d.erase("files");
    manifest["diagnostics"] = d;
    manifest["status"] = "ok";
    write_json(dir / "manifest.json", manifest);
    return manifest;
  } catch (const Error& e) {
    manifest["status"] = "error";
    manifest["error"] = {{"kind", std::string(to_string(e.kind()))},
                         {"message", e.what()},
                         {"regime", is_regime_error(e.kind())},
                         {"exit_status", exit_status(e.kind())}};
    write_json(dir / "error.json", manifest["error"]);
    write_json(dir / "manifest.json", manifest);
    throw;
  }
}

}  // namespace wki
