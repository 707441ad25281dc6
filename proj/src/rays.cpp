#include "tomo/rays.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/errors.hpp"

namespace tomo {

namespace {

// Interpolation weight with tiny residue snapped so that axis-aligned
// geometries reproduce voxel values exactly.
double snap_weight(double w) {
  if (std::abs(w) < 1e-12) return 0.0;
  if (std::abs(w - 1.0) < 1e-12) return 1.0;
  return w;
}

// Bilinear interpolation of slice values at ground position (y, z);
// zero outside the voxel-center hull.
double interp_slice(const MagnitudeVolume& vol, int ix, double y, double z) {
  const GroundGrid& g = vol.grid;
  const double fy = (y - g.y0) / g.dy;
  const double fz = (z - g.z0) / g.dz;
  if (fy < -1.0 || fy > g.ny || fz < -1.0 || fz > g.nz) return 0.0;
  const int jy = static_cast<int>(std::floor(fy));
  const int jz = static_cast<int>(std::floor(fz));
  const double wy = snap_weight(fy - jy);
  const double wz = snap_weight(fz - jz);
  double acc = 0.0;
  for (int ey = 0; ey <= 1; ++ey)
    for (int ez = 0; ez <= 1; ++ez) {
      const double w = (ey ? wy : 1.0 - wy) * (ez ? wz : 1.0 - wz);
      if (w == 0.0) continue;
      const int yy = jy + ey, zz = jz + ez;
      if (yy < 0 || yy >= g.ny || zz < 0 || zz >= g.nz) continue;
      acc += w * vol.at(ix, yy, zz);
    }
  return acc;
}

}  // namespace

void RayVolume::ray_of_voxel(int iy, int iz, int* ie, int* is) const {
  const double y = grid.y(iy) - y_c;
  const double z = grid.z(iz) - z_c;
  const double e = y * cos_t + z * sin_t;
  const double rho = y * sin_t - z * cos_t;
  *ie = std::clamp(static_cast<int>(std::lround((e - e_min) / d_elev)), 0,
                   n_elev - 1);
  *is = std::clamp(static_cast<int>(std::lround((rho - rho_min) / d_ray)), 0,
                   n_samples - 1);
}

double RayVolume::total_mass() const {
  double total = 0.0;
  for (double v : value) total += v;
  return total * d_ray * d_elev * grid.dx;
}

RayVolume resample_to_rays(const MagnitudeVolume& volume,
                           const AcquisitionGeometry& geom) {
  const GroundGrid& g = volume.grid;
  g.validate();
  if (volume.v.size() != g.num_voxels())
    throw ConfigError("resample_to_rays: volume does not match its grid");

  RayVolume rays;
  rays.grid = g;
  rays.n_azimuth = g.nx;
  rays.sin_t = geom.sin_theta();
  rays.cos_t = geom.cos_theta();
  rays.d_ray = std::min(g.dy, g.dz);
  rays.d_elev = rays.d_ray;

  const double y_lo = g.y0, y_hi = g.y(g.ny - 1);
  const double z_lo = g.z0, z_hi = g.z(g.nz - 1);
  rays.y_c = 0.5 * (y_lo + y_hi);
  rays.z_c = 0.5 * (z_lo + z_hi);

  double e_min = 0, e_max = 0, r_min = 0, r_max = 0;
  bool first = true;
  for (double y : {y_lo, y_hi})
    for (double z : {z_lo, z_hi}) {
      const double yy = y - rays.y_c, zz = z - rays.z_c;
      const double e = yy * rays.cos_t + zz * rays.sin_t;
      const double rho = yy * rays.sin_t - zz * rays.cos_t;
      if (first) {
        e_min = e_max = e;
        r_min = r_max = rho;
        first = false;
      } else {
        e_min = std::min(e_min, e);
        e_max = std::max(e_max, e);
        r_min = std::min(r_min, rho);
        r_max = std::max(r_max, rho);
      }
    }
  rays.e_min = e_min;
  rays.rho_min = r_min;
  rays.n_elev = static_cast<int>(std::ceil((e_max - e_min) / rays.d_elev - 1e-9)) + 1;
  rays.n_samples =
      static_cast<int>(std::ceil((r_max - r_min) / rays.d_ray - 1e-9)) + 1;

  const std::size_t total =
      rays.num_columns() * static_cast<std::size_t>(rays.n_samples);
  rays.value.resize(total);
  rays.voxel_of_sample.assign(total, -1);

  for (int ia = 0; ia < rays.n_azimuth; ++ia)
    for (int ie = 0; ie < rays.n_elev; ++ie)
      for (int is = 0; is < rays.n_samples; ++is) {
        const double y = rays.sample_y(ie, is);
        const double z = rays.sample_z(ie, is);
        const std::size_t k = rays.sample_index(ia, ie, is);
        rays.value[k] = interp_slice(volume, ia, y, z);
        const int iy = static_cast<int>(std::lround((y - g.y0) / g.dy));
        const int iz = static_cast<int>(std::lround((z - g.z0) / g.dz));
        if (iy >= 0 && iy < g.ny && iz >= 0 && iz < g.nz)
          rays.voxel_of_sample[k] =
              static_cast<std::int64_t>(g.index(ia, iy, iz));
      }

  return rays;
}

}  // namespace tomo
