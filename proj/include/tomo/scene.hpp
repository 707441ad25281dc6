#pragma once

#include <cstdint>
#include <vector>

#include "tomo/volume.hpp"

namespace tomo {

// Axis-aligned building footprint with a flat roof at z0 + height.
struct Box {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double height = 0.0;  // meters above the ground plane
};

// Synthetic urban scene: boxes on a flat ground plane. Reflectivity sits on
// the visible surfaces only (ground, sensor-facing facades, roofs); rear
// facades stay dark.
struct SceneSpec {
  std::vector<Box> boxes;
  double ground_amplitude = 1.0;
  double facade_amplitude = 1.0;
  double roof_amplitude = 1.0;
  double scatterer_density = 1e9;  // per meter; >= 1/min-spacing keeps all
  double noise_sigma = 0.0;        // per-component std of the stack noise
  std::uint64_t seed = 0;

  void validate(const GroundGrid& grid) const;
};

struct Scene {
  ComplexVolume reflectivity;
  ElevationMap truth;
};

// Builds the reflectivity volume and the exact upper-envelope elevation map.
// Surface voxels get the configured amplitude and a phase drawn uniformly on
// [0, 2pi); draws are keyed by (seed, voxel) so the result is deterministic.
Scene make_scene(const SceneSpec& spec, const GroundGrid& grid);

}  // namespace tomo
