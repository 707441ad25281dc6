#include "tomo/scene.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/errors.hpp"
#include "tomo/rng.hpp"

namespace tomo {

void SceneSpec::validate(const GroundGrid& grid) const {
  if (ground_amplitude < 0 || facade_amplitude < 0 || roof_amplitude < 0)
    throw ConfigError("scene: amplitudes must be >= 0");
  if (noise_sigma < 0) throw ConfigError("scene: noise_sigma must be >= 0");
  if (scatterer_density <= 0)
    throw ConfigError("scene: scatterer_density must be > 0");
  const double x_hi = grid.x(grid.nx - 1), y_hi = grid.y(grid.ny - 1);
  for (const Box& b : boxes) {
    if (b.height < 0) throw ConfigError("scene: box height must be >= 0");
    if (b.x_min > b.x_max || b.y_min > b.y_max)
      throw ConfigError("scene: degenerate box footprint");
    if (b.x_min < grid.x0 - 0.5 * grid.dx || b.x_max > x_hi + 0.5 * grid.dx ||
        b.y_min < grid.y0 - 0.5 * grid.dy || b.y_max > y_hi + 0.5 * grid.dy)
      throw ConfigError("scene: box footprint outside the ground grid");
    if (b.height > (grid.nz - 1) * grid.dz + 0.5 * grid.dz)
      throw ConfigError("scene: box taller than the grid");
  }
}

namespace {

bool covers(const Box& b, double x, double y) {
  return x >= b.x_min && x <= b.x_max && y >= b.y_min && y <= b.y_max;
}

}  // namespace

Scene make_scene(const SceneSpec& spec, const GroundGrid& grid) {
  grid.validate();
  spec.validate(grid);

  Scene scene;
  scene.reflectivity = ComplexVolume(grid);
  scene.truth = ElevationMap(grid);

  // Upper envelope of the boxes over the ground plane.
  std::vector<int> level(grid.num_columns(), 0);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      double h = 0.0;
      for (const Box& b : spec.boxes)
        if (covers(b, grid.x(ix), grid.y(iy))) h = std::max(h, b.height);
      const int k = std::min(grid.nz - 1,
                             static_cast<int>(std::lround(h / grid.dz)));
      level[grid.column_index(ix, iy)] = k;
      scene.truth.at(ix, iy) = grid.z0 + k * grid.dz;
    }

  // Amplitude per surface voxel; facades only on the sensor-facing (low-y)
  // wall of each box.
  std::vector<double> amp(grid.num_voxels(), 0.0);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      const int k = level[grid.column_index(ix, iy)];
      const double a = (k == 0) ? spec.ground_amplitude : spec.roof_amplitude;
      std::size_t p = grid.index(ix, iy, k);
      amp[p] = std::max(amp[p], a);
    }
  for (const Box& b : spec.boxes) {
    const int iy = std::clamp(
        static_cast<int>(std::lround((b.y_min - grid.y0) / grid.dy)), 0,
        grid.ny - 1);
    const int k_top = std::min(
        grid.nz - 1, static_cast<int>(std::lround(b.height / grid.dz)));
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (!covers(b, grid.x(ix), grid.y(iy))) continue;
      for (int iz = 0; iz <= k_top; ++iz) {
        std::size_t p = grid.index(ix, iy, iz);
        amp[p] = std::max(amp[p], spec.facade_amplitude);
      }
    }
  }

  // Scatterer placement: keep probability derived from the density, phases
  // uniform. Both draws are keyed on the voxel index.
  const double pitch = std::min({grid.dx, grid.dy, grid.dz});
  const double keep_p = std::min(1.0, spec.scatterer_density * pitch);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (std::size_t p = 0; p < amp.size(); ++p) {
    if (amp[p] == 0.0) continue;
    if (keep_p < 1.0) {
      const double gate = u01_from_bits(hash_combine(spec.seed ^ 0x5ca77e8ed,
                                                     p));
      if (gate >= keep_p) continue;
    }
    const double phase = kTwoPi * u01_from_bits(hash_combine(spec.seed, p));
    scene.reflectivity.v[p] =
        amp[p] * std::complex<double>(std::cos(phase), std::sin(phase));
  }

  return scene;
}

}  // namespace tomo
