#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "tomo/geometry.hpp"

namespace tomo {

// Complex reflectivity u(x,y,z) on a GroundGrid. Storage follows
// GroundGrid::index (x-major, z fastest).
struct ComplexVolume {
  GroundGrid grid;
  std::vector<std::complex<double>> v;

  ComplexVolume() = default;
  explicit ComplexVolume(const GroundGrid& g)
      : grid(g), v(g.num_voxels(), {0.0, 0.0}) {}

  std::complex<double>& at(int ix, int iy, int iz) {
    return v[grid.index(ix, iy, iz)];
  }
  std::complex<double> at(int ix, int iy, int iz) const {
    return v[grid.index(ix, iy, iz)];
  }
};

struct MagnitudeVolume {
  GroundGrid grid;
  std::vector<double> v;

  MagnitudeVolume() = default;
  explicit MagnitudeVolume(const GroundGrid& g)
      : grid(g), v(g.num_voxels(), 0.0) {}

  double& at(int ix, int iy, int iz) { return v[grid.index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return v[grid.index(ix, iy, iz)]; }
};

MagnitudeVolume magnitudes(const ComplexVolume& u);

// N co-registered complex images on a RadarGrid. Layout: image-major, then
// azimuth, then range.
struct SARStack {
  RadarGrid rgrid;
  int num_images = 0;
  std::vector<std::complex<double>> v;

  SARStack() = default;
  SARStack(const RadarGrid& rg, int n)
      : rgrid(rg), num_images(n),
        v(static_cast<std::size_t>(n) * rg.num_pixels(), {0.0, 0.0}) {}

  std::size_t index(int n, int ia, int ir) const {
    return static_cast<std::size_t>(n) * rgrid.num_pixels() +
           rgrid.pixel_index(ia, ir);
  }
  std::complex<double>& at(int n, int ia, int ir) { return v[index(n, ia, ir)]; }
  std::complex<double> at(int n, int ia, int ir) const {
    return v[index(n, ia, ir)];
  }
};

// Elevation map z = E(x,y) on the horizontal grid of a GroundGrid, plus a
// validity mask (0 marks shadow-filled columns). Row layout matches
// GroundGrid::column_index.
struct ElevationMap {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double x0 = 0.0, y0 = 0.0;
  std::vector<double> z;
  std::vector<std::uint8_t> valid;

  ElevationMap() = default;
  explicit ElevationMap(const GroundGrid& g)
      : nx(g.nx), ny(g.ny), dx(g.dx), dy(g.dy), x0(g.x0), y0(g.y0),
        z(g.num_columns(), g.z0), valid(g.num_columns(), 1) {}

  std::size_t column_index(int ix, int iy) const {
    return static_cast<std::size_t>(ix) * ny + iy;
  }
  double& at(int ix, int iy) { return z[column_index(ix, iy)]; }
  double at(int ix, int iy) const { return z[column_index(ix, iy)]; }
  bool same_horizontal_grid(const ElevationMap& o) const {
    return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy &&
           x0 == o.x0 && y0 == o.y0;
  }
};

}  // namespace tomo
