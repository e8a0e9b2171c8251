#include "wki/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wki {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ResolutionExceeded: return "resolution-exceeded";
    case ErrorKind::PossibleBoundState: return "possible-bound-state";
    case ErrorKind::RhpUnsolved: return "rhp-unsolved";
    case ErrorKind::SlopeConditionViolated: return "slope-condition-violated";
    case ErrorKind::HodographUnsolved: return "hodograph-unsolved";
    case ErrorKind::HodographInconsistent: return "hodograph-inconsistent";
    case ErrorKind::RangeError: return "range-error";
    case ErrorKind::DiagnosticUnreliable: return "diagnostic-unreliable";
    case ErrorKind::EvolutionDiverged: return "evolution-diverged";
    case ErrorKind::InternalError: return "internal-error";
  }
  return "internal-error";
}

bool is_regime_error(ErrorKind kind) {
  return kind == ErrorKind::PossibleBoundState || kind == ErrorKind::SlopeConditionViolated ||
         kind == ErrorKind::EvolutionDiverged;
}

std::vector<RVec> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
  std::vector<RVec> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    RVec row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::InvalidArgument, "non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<RVec>& columns) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c][r];
    out << '\n';
  }
}

void write_complex_csv(const std::filesystem::path& path, const std::string& axis, const RVec& x,
                       const CVec& values) {
  RVec re(values.size()), im(values.size()), ab(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    re[k] = values[k].real();
    im[k] = values[k].imag();
    ab[k] = std::abs(values[k]);
  }
  write_csv(path, {axis, "re", "im", "abs"}, {x, re, im, ab});
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

json to_json(const SpectralGrid& g) {
  return {{"Z", g.half_width()}, {"N_z", g.size()}, {"z_min", g.z_min()}, {"padding", g.padding()}};
}

namespace {

json complex_array(const CVec& v) {
  json re = json::array(), im = json::array();
  for (const auto& c : v) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  return {{"re", re}, {"im", im}};
}

CVec complex_from(const json& j) {
  const auto re = j.at("re").get<RVec>();
  const auto im = j.at("im").get<RVec>();
  require(re.size() == im.size(), "complex array parts differ in length");
  CVec out(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) out[k] = {re[k], im[k]};
  return out;
}

}  // namespace

json to_json(const ScatteringData& sd) {
  return {{"grid", to_json(sd.zgrid)},
          {"t", sd.t},
          {"r", complex_array(sd.r)},
          {"lambdas", sd.lambdas},
          {"a", complex_array(sd.a)},
          {"b", complex_array(sd.b)},
          {"diagnostics",
           {{"max_unitarity_defect", sd.max_unitarity_defect},
            {"max_symmetry_defect", sd.max_symmetry_defect},
            {"max_det_defect", sd.max_det_defect},
            {"min_abs_a", sd.min_abs_a},
            {"outer_truncation", sd.outer_truncation},
            {"inner_truncation", sd.inner_truncation},
            {"winding", sd.winding}}}};
}

ScatteringData scattering_from_json(const json& j) {
  try {
    const auto& g = j.at("grid");
    const SpectralGrid grid(g.at("Z").get<double>(), g.at("N_z").get<int>(), g.at("z_min").get<double>(),
                            g.at("padding").get<int>());
    ScatteringData sd{grid, complex_from(j.at("r"))};
    require(static_cast<int>(sd.r.size()) == grid.size(), "r length does not match N_z");
    sd.t = j.at("t").get<double>();
    sd.lambdas = j.value("lambdas", RVec{});
    if (j.contains("a")) sd.a = complex_from(j.at("a"));
    if (j.contains("b")) sd.b = complex_from(j.at("b"));
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      sd.max_unitarity_defect = d.value("max_unitarity_defect", 0.0);
      sd.max_symmetry_defect = d.value("max_symmetry_defect", 0.0);
      sd.max_det_defect = d.value("max_det_defect", 0.0);
      sd.min_abs_a = d.value("min_abs_a", 1.0);
      sd.outer_truncation = d.value("outer_truncation", 0.0);
      sd.inner_truncation = d.value("inner_truncation", 0.0);
      sd.winding = d.value("winding", 0.0);
    }
    return sd;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed scattering data: ") + e.what());
  }
}

json diagnostics_json(const ReconstructionResult& r) {
  return {{"t", r.t},
          {"x_h_points", r.x_h.size()},
          {"max_slope", r.max_slope},
          {"eps_monotonicity_defect", r.eps_monotonicity_defect},
          {"route_gap", r.route_gap},
          {"map_slope_min", r.map_slope_min},
          {"map_slope_max", r.map_slope_max},
          {"x_c", r.x_c},
          {"eps_infinity", r.eps_infinity},
          {"mass_qh", r.mass_qh},
          {"mass_from_r", r.mass_from_r},
          {"interpolation_error", r.interpolation_error},
          {"max_residual", r.max_residual},
          {"fixed_point_iterations", r.fixed_point_iterations}};
}

void write_cell_log(const std::filesystem::path& path, const std::vector<CellLog>& cells) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "x_h,t,kind,solver,iterations,d_iterations,residual,d_residual,abs_slope\n";
  for (const auto& c : cells)
    out << c.x_h << ',' << c.t << ',' << to_string(c.kind) << ',' << to_string(c.solver) << ','
        << c.iterations << ',' << c.d_iterations << ',' << c.residual << ',' << c.d_residual << ','
        << c.abs_slope << '\n';
}

json summary_json(const EvolutionRun& run) {
  return {{"T", run.T},
          {"dt", run.dt},
          {"steps", run.steps},
          {"snapshot_times", run.snapshot_times},
          {"e1", run.e1},
          {"e1_drift", run.e1_drift}};
}

}  // namespace wki
