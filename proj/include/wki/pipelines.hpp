#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wki/io.hpp"
#include "wki/potentials.hpp"

namespace wki {

struct RunConfig {
  std::string pipeline = "roundtrip";  // forward | evolve | inverse | roundtrip | compare-pde | soliton

  struct Grid {
    double L = 10.0;
    int N = 512;
    double Z = 20.0;
    int N_z = 2048;
    double z_min = 0.15;
    int padding = 4;
  } grid;

  PotentialSpec potential;

  struct Time {
    std::vector<double> t{0.0};
    double dt = 0.0;  // 0: largest stable step
    double cfl = 0.2;
  } time;

  struct Tolerances {
    double rhp = 1e-10;
    double min_abs_a = 0.5;
    double slope_margin = 1e-6;
    double fixed_point = 1e-10;
    double magnus_bound = 1e-9;
    double blowup_guard = 1e3;
  } tolerances;

  struct Soliton {
    double xi = 3.0;
    double eta = 1.0;
  } soliton;

  std::string input;  // scattering JSON for the inverse pipeline
  std::string output = "out";
  int threads = 0;
};

json default_config_json();
json to_json(const RunConfig& cfg);
RunConfig config_from_json(const json& j);

/// Applies "a.b=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(json& j, const std::string& assignment);

/// Validates the config against module preconditions.
void validate(const RunConfig& cfg);

/// 0 ok, 2 usage, 3 regime outcome, 4 numerical failure.
int exit_status(ErrorKind kind);

// Each pipeline writes its files into cfg.output and returns the diagnostics
// block that goes into the manifest.
json run_forward(const RunConfig& cfg);
json run_evolve(const RunConfig& cfg);
json run_inverse(const RunConfig& cfg);
json run_roundtrip(const RunConfig& cfg);
json run_compare_pde(const RunConfig& cfg);
json run_soliton(const RunConfig& cfg);

/// Dispatches on cfg.pipeline, then writes manifest.json (config echo,
/// versions, diagnostics, output files). On failure writes error.json and
/// rethrows.
json run_pipeline(const RunConfig& cfg);

}  // namespace wki
