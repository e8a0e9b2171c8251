#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "wki/direct_scattering.hpp"
#include "wki/pde_oracle.hpp"
#include "wki/reconstruction.hpp"

namespace wki {

using json = nlohmann::ordered_json;

/// Numeric rows of a CSV file; a leading header line and '#' comments are skipped.
std::vector<RVec> read_csv(const std::filesystem::path& path);

/// Writes `header` then one row per sample, doubles at round-trip precision.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<RVec>& columns);

/// Columns: <axis>, re, im, abs.
void write_complex_csv(const std::filesystem::path& path, const std::string& axis, const RVec& x,
                       const CVec& values);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

json to_json(const SpectralGrid& g);
json to_json(const ScatteringData& sd);
ScatteringData scattering_from_json(const json& j);

/// Scalar diagnostics of a reconstruction (arrays go to CSV).
json diagnostics_json(const ReconstructionResult& r);
/// Columns: x_H, t, kind, solver, iterations, d_iterations, residual, d_residual, abs_slope.
void write_cell_log(const std::filesystem::path& path, const std::vector<CellLog>& cells);

json summary_json(const EvolutionRun& run);

}  // namespace wki
