#include "tomo/evaluation.hpp"

#include <cmath>

#include "tomo/errors.hpp"
#include "tomo/segmentation.hpp"

namespace tomo {

SurfaceErrorReport mean_error(const ElevationMap& est,
                              const ElevationMap& truth) {
  if (!est.same_horizontal_grid(truth))
    throw ConfigError("mean_error: elevation maps on different grids");
  SurfaceErrorReport report;
  report.per_column_error.resize(est.z.size());
  double acc = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < est.z.size(); ++i) {
    report.per_column_error[i] = std::abs(est.z[i] - truth.z[i]);
    if (est.valid[i] && truth.valid[i]) {
      acc += report.per_column_error[i];
      ++used;
    }
  }
  report.valid_columns = used;
  report.mean_abs_error = used > 0 ? acc / used : 0.0;
  report.masked_fraction =
      1.0 - static_cast<double>(used) / static_cast<double>(est.z.size());
  return report;
}

BetaSweepResult beta_sweep(const MagnitudeVolume& volume,
                           const AcquisitionGeometry& geom,
                           const ElevationMap& truth,
                           std::span<const double> betas) {
  if (betas.empty()) throw ConfigError("beta_sweep: empty beta list");
  BetaSweepResult result;
  double best_err = 0.0;
  bool have_best = false;
  for (double beta : betas) {
    const ElevationMap est = segment_surface(volume, geom, beta);
    const SurfaceErrorReport rep = mean_error(est, truth);
    result.errors.push_back({beta, rep.mean_abs_error});
    if (!have_best || rep.mean_abs_error < best_err ||
        (rep.mean_abs_error == best_err && beta < result.best_beta)) {
      result.best_beta = beta;
      best_err = rep.mean_abs_error;
      have_best = true;
    }
  }
  return result;
}

}  // namespace tomo
