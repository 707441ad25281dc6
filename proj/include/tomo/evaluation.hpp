#pragma once

#include <span>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

struct SurfaceErrorReport {
  double mean_abs_error = 0.0;          // meters, over jointly valid columns
  std::vector<double> per_column_error; // meters, every column
  double masked_fraction = 0.0;
  int valid_columns = 0;
};

// Mean |est - truth| over columns valid in both maps (shadow columns drop
// out). Throws ConfigError on horizontal grid mismatch.
SurfaceErrorReport mean_error(const ElevationMap& est,
                              const ElevationMap& truth);

struct BetaSweepEntry {
  double beta = 0.0;
  double mean_error = 0.0;
};

struct BetaSweepResult {
  double best_beta = 0.0;
  std::vector<BetaSweepEntry> errors;
};

// Segments the volume once per beta and scores against the truth; returns the
// error-minimizing beta (ties go to the smaller value).
BetaSweepResult beta_sweep(const MagnitudeVolume& volume,
                           const AcquisitionGeometry& geom,
                           const ElevationMap& truth,
                           std::span<const double> betas);

}  // namespace tomo
