#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace tomo {

// Multi-baseline acquisition: N co-registered images taken from parallel
// tracks displaced by perpendicular baselines b_n (b_0 = 0 for the master).
// The interferometric phase of a scatterer at height z on image n is
// -xi_n * z with xi_n = 4*pi*b_n / (lambda * r0 * sin(theta)).
struct AcquisitionGeometry {
  int num_images = 0;              // N >= 2
  std::vector<double> baselines;   // meters, length N
  double wavelength = 0.0;         // meters
  double incidence = 0.0;          // radians, 0 < theta <= pi/2
  double reference_range = 0.0;    // meters, r0

  // Throws ConfigError if any invariant fails.
  void validate() const;

  // sin/cos of the incidence with values below 1e-15 snapped to zero, so the
  // axis-aligned case theta = pi/2 yields exact horizontal rays.
  double sin_theta() const;
  double cos_theta() const;

  // xi_n in rad/meter; n is a 0-based image index. Throws std::out_of_range.
  double spatial_frequency(int n) const;

  // Flat-wavefront range model: rho(y,z) = r0 + y*sin(theta) - z*cos(theta).
  double slant_range(double y, double z) const;

  // Steering vector a(z): component n equals exp(-j * xi_n * z).
  std::vector<std::complex<double>> steering_vector(double z) const;
};

struct GroundGrid {
  int nx = 0, ny = 0, nz = 0;
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double x0 = 0.0, y0 = 0.0, z0 = 0.0;

  void validate() const;

  double x(int ix) const { return x0 + ix * dx; }
  double y(int iy) const { return y0 + iy * dy; }
  double z(int iz) const { return z0 + iz * dz; }
  double z_top() const { return z0 + (nz - 1) * dz; }

  std::size_t num_voxels() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t num_columns() const { return static_cast<std::size_t>(nx) * ny; }

  // Voxel linearization: x-major, then y, then z (z fastest).
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * ny + iy) * nz + iz;
  }
  std::size_t column_index(int ix, int iy) const {
    return static_cast<std::size_t>(ix) * ny + iy;
  }
};

struct RadarGrid {
  int azimuth_count = 0, range_count = 0;
  double d_azimuth = 0.0, d_range = 0.0;
  double azimuth_origin = 0.0;  // meters, center of azimuth bin 0
  double range_origin = 0.0;    // meters, center of range bin 0

  void validate() const;

  std::size_t num_pixels() const {
    return static_cast<std::size_t>(azimuth_count) * range_count;
  }
  std::size_t pixel_index(int ia, int ir) const {
    return static_cast<std::size_t>(ia) * range_count + ir;
  }
  double range(int ir) const { return range_origin + ir * d_range; }
  double azimuth(int ia) const { return azimuth_origin + ia * d_azimuth; }
};

struct RadarCell {
  int azimuth = 0;
  int range = 0;
};

// Maps a ground voxel to the radar resolution cell whose range bin contains
// rho(y,z). Ties at bin boundaries go to the lower index. Returns nullopt
// when the voxel falls outside the swath.
std::optional<RadarCell> radar_cell_of(const AcquisitionGeometry& geom,
                                       const RadarGrid& rgrid,
                                       double x, double y, double z);

// Precomputed voxel <-> radar-cell partition plus the per-height steering
// phases. This is the discrete operator Phi in factored form: every in-swath
// voxel belongs to exactly one cell, and its column of Phi is the steering
// vector of its height placed in that cell's N rows.
class CellMap {
 public:
  CellMap(const AcquisitionGeometry& geom, const RadarGrid& rgrid,
          const GroundGrid& grid);

  const AcquisitionGeometry& geom() const { return geom_; }
  const RadarGrid& rgrid() const { return rgrid_; }
  const GroundGrid& grid() const { return grid_; }

  // -1 when the voxel is out of swath.
  std::int64_t cell_of_voxel(std::size_t voxel) const {
    return cell_of_voxel_[voxel];
  }
  // Voxels of cell c, CSR layout.
  const std::int64_t* cell_begin(std::int64_t cell) const {
    return cell_voxels_.data() + cell_start_[cell];
  }
  const std::int64_t* cell_end(std::int64_t cell) const {
    return cell_voxels_.data() + cell_start_[cell + 1];
  }
  std::size_t num_cells() const { return rgrid_.num_pixels(); }
  int max_voxels_per_cell() const { return max_voxels_per_cell_; }
  std::size_t num_mapped_voxels() const { return cell_voxels_.size(); }

  // exp(-j xi_n z(iz)), laid out as [iz * N + n].
  const std::complex<double>* steering_row(int iz) const {
    return steer_.data() + static_cast<std::size_t>(iz) * geom_.num_images;
  }

 private:
  AcquisitionGeometry geom_;
  RadarGrid rgrid_;
  GroundGrid grid_;
  std::vector<std::int64_t> cell_of_voxel_;
  std::vector<std::int64_t> cell_start_;
  std::vector<std::int64_t> cell_voxels_;
  std::vector<std::complex<double>> steer_;
  int max_voxels_per_cell_ = 0;
};

}  // namespace tomo
