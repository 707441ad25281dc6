#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tomo/estimators.hpp"
#include "tomo/geometry.hpp"
#include "tomo/scene.hpp"
#include "tomo/sparse.hpp"

namespace tomo {

struct EstimatorConfig {
  std::string method;  // beamforming | capon | music | cs | l1-3d
  SpectralParams spectral;
  double mu = 0.1;  // uniform sparsity weight for cs / l1-3d
  SolverParams solver;
};

struct SegmentationConfig {
  double beta = 1.0;
  double tau_shadow = 0.95;
  bool shadow_processing = true;
};

struct RedressConfig {
  int iterations = 5;
  double mu0 = 0.05;
  double b = 0.5;
  bool warm_start = true;
};

struct IoPaths {
  std::string stack_path;
  std::string volume_path;
  std::string truth_path;
  std::string est_path;
  std::uint64_t seed = 1;
};

// One config file drives a whole pipeline run. Unknown keys anywhere are
// rejected; blocks are validated by the command that needs them.
struct RunConfig {
  AcquisitionGeometry geometry;
  GroundGrid ground_grid;
  RadarGrid radar_grid;
  SceneSpec scene;
  EstimatorConfig estimator;
  SegmentationConfig segmentation;
  RedressConfig redress;
  IoPaths io;

  bool has_geometry = false;
  bool has_ground_grid = false;
  bool has_radar_grid = false;
  bool has_scene = false;
  bool has_estimator = false;
  bool has_segmentation = false;
  bool has_redress = false;

  // The radar grid from the config, or one derived from the geometry and the
  // ground grid: azimuth bins on the x columns, range bins of min(dy,dz)
  // covering the volume.
  RadarGrid effective_radar_grid() const;
};

RunConfig load_config(const std::filesystem::path& path);

RadarGrid derive_radar_grid(const AcquisitionGeometry& geom,
                            const GroundGrid& grid);

}  // namespace tomo
