#pragma once

#include <cstdint>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// A reflectivity-magnitude volume resampled along lines of sight. Rays run at
// constant azimuth (one fan per x slice) in the direction of increasing slant
// range (sin(theta), -cos(theta)) in the (y,z) plane; the fan is indexed by
// the orthogonal elevation coordinate. Samples within a column are ordered by
// increasing range from the sensor.
struct RayVolume {
  int n_azimuth = 0;   // = grid.nx
  int n_elev = 0;      // rays per azimuth slice
  int n_samples = 0;   // samples per ray
  double d_ray = 0.0;  // spacing along the ray, = min(dy, dz)
  double d_elev = 0.0; // spacing across rays, = d_ray

  // Ray-frame parameterization relative to the slice center (y_c, z_c).
  double sin_t = 0.0, cos_t = 0.0;
  double y_c = 0.0, z_c = 0.0;
  double e_min = 0.0, rho_min = 0.0;

  GroundGrid grid;

  std::vector<double> value;                // interpolated |u| per sample
  std::vector<std::int64_t> voxel_of_sample;  // nearest voxel, -1 outside

  std::size_t num_columns() const {
    return static_cast<std::size_t>(n_azimuth) * n_elev;
  }
  std::size_t sample_index(int ia, int ie, int is) const {
    return (static_cast<std::size_t>(ia) * n_elev + ie) *
               static_cast<std::size_t>(n_samples) + is;
  }

  // (y,z) position of a sample.
  double sample_y(int ie, int is) const {
    return y_c + (rho_min + is * d_ray) * sin_t + (e_min + ie * d_elev) * cos_t;
  }
  double sample_z(int ie, int is) const {
    return z_c - (rho_min + is * d_ray) * cos_t + (e_min + ie * d_elev) * sin_t;
  }

  // Ray coordinates of a voxel center; every grid voxel lands inside the fan.
  void ray_of_voxel(int iy, int iz, int* ie, int* is) const;

  // Total resampled mass: sum of samples * d_ray * d_elev * dx.
  double total_mass() const;
};

// Linear interpolation of |u| along each ray. The fan covers the bounding box
// of voxel centers of each azimuth slice; samples outside the grid read zero.
RayVolume resample_to_rays(const MagnitudeVolume& volume,
                           const AcquisitionGeometry& geom);

}  // namespace tomo
