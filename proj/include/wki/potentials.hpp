#pragma once

#include <map>
#include <string>

#include "wki/lax.hpp"

namespace wki {

/// Named initial data. Families and their parameters (defaults in brackets):
///   zero
///   gaussian  amplitude [0.05], width [1], center [0], wavenumber [0]
///             q = amplitude exp(-((x - center)/width)^2 + i wavenumber x)
///   sech      amplitude [2], width [1], center [0]
///   box       amplitude [0.05], half_width [1], center [0]
///   soliton   xi [3], eta [1], t [0]
///   file      CSV with columns x, re, im; resampled by monotone cubic
struct PotentialSpec {
  std::string family = "gaussian";
  std::map<std::string, double> params;
  std::string file;

  double get(const std::string& key, double fallback) const;
};

/// Parameters of the family with defaults filled in; unknown keys are rejected.
std::map<std::string, double> effective_params(const PotentialSpec& spec);

CVec sample_potential(const PotentialSpec& spec, const SpatialGrid& grid);
Potential build_potential(const PotentialSpec& spec, const SpatialGrid& grid);

}  // namespace wki
