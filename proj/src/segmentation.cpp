#include "tomo/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/errors.hpp"

namespace tomo {

namespace {

int level_of(const ElevationMap& map, const GroundGrid& grid, int ix, int iy) {
  const double rel = (map.at(ix, iy) - grid.z0) / grid.dz;
  const int k = static_cast<int>(std::lround(rel));
  if (k < 0 || k >= grid.nz)
    throw ConfigError("surface_energy: elevation outside the grid");
  return k;
}

}  // namespace

CumulativeProfiles cumulative_profiles(const RayVolume& rays) {
  CumulativeProfiles prof;
  prof.n_columns = static_cast<int>(rays.num_columns());
  prof.n_samples = rays.n_samples;
  prof.d_ray = rays.d_ray;
  const std::size_t total = rays.value.size();
  prof.cminus.resize(total);
  prof.cplus.resize(total);
  prof.r_equi.resize(prof.n_columns);

  for (int col = 0; col < prof.n_columns; ++col) {
    const std::size_t base = prof.index(col, 0);
    double acc = 0.0;
    for (int s = 0; s < prof.n_samples; ++s) {
      const double m = rays.value[base + s];
      if (m < 0.0) throw ConfigError("cumulative_profiles: negative sample");
      acc += m * prof.d_ray;
      prof.cminus[base + s] = acc;
    }
    acc = 0.0;
    for (int s = prof.n_samples - 1; s >= 0; --s) {
      prof.cplus[base + s] = acc;
      acc += rays.value[base + s] * prof.d_ray;
    }
    int equi = prof.n_samples - 1;
    for (int s = 0; s < prof.n_samples; ++s)
      if (prof.cminus[base + s] >= prof.cplus[base + s]) {
        equi = s;
        break;
      }
    prof.r_equi[col] = equi;
  }
  return prof;
}

double data_penalty(const CumulativeProfiles& prof, int column, int r) {
  if (r < 0 || r >= prof.n_samples)
    throw std::out_of_range("data_penalty: sample index out of range");
  const std::size_t base = prof.index(column, 0);
  double d = 0.0;
  for (int s = 0; s < r; ++s)
    d += std::max(prof.cminus[base + s] - prof.cplus[base + s], 0.0);
  for (int s = r; s < prof.n_samples; ++s)
    d += std::max(prof.cplus[base + s] - prof.cminus[base + s], 0.0);
  return d * prof.d_ray;
}

TerminalCaps terminal_caps(const RayVolume& rays,
                           const CumulativeProfiles& prof) {
  TerminalCaps caps;
  caps.air_cost.assign(rays.grid.num_voxels(), 0.0);
  caps.interior_cost.assign(rays.grid.num_voxels(), 0.0);
  for (int col = 0; col < prof.n_columns; ++col) {
    const std::size_t base = prof.index(col, 0);
    for (int s = 0; s < prof.n_samples; ++s) {
      const std::int64_t p = rays.voxel_of_sample[base + s];
      if (p < 0) continue;
      const double imbalance = prof.cminus[base + s] - prof.cplus[base + s];
      if (imbalance > 0.0)
        caps.air_cost[p] += imbalance * prof.d_ray;
      else if (imbalance < 0.0)
        caps.interior_cost[p] += -imbalance * prof.d_ray;
    }
  }
  return caps;
}

FlowNetwork build_graph(const MagnitudeVolume& volume,
                        const AcquisitionGeometry& geom, double beta) {
  if (beta < 0) throw ConfigError("build_graph: beta must be >= 0");
  const GroundGrid& g = volume.grid;
  const RayVolume rays = resample_to_rays(volume, geom);
  const CumulativeProfiles prof = cumulative_profiles(rays);
  const TerminalCaps caps = terminal_caps(rays, prof);

  FlowNetwork net;
  const FlowNetwork::NodeId base =
      net.add_nodes(static_cast<int>(g.num_voxels()));
  const auto node = [&](int ix, int iy, int iz) {
    return base + static_cast<FlowNetwork::NodeId>(g.index(ix, iy, iz));
  };

  for (std::size_t p = 0; p < g.num_voxels(); ++p) {
    if (caps.air_cost[p] > 0.0)
      net.add_arc(net.source(), base + static_cast<FlowNetwork::NodeId>(p),
                  caps.air_cost[p], 0.0);
    if (caps.interior_cost[p] > 0.0)
      net.add_arc(base + static_cast<FlowNetwork::NodeId>(p), net.sink(),
                  caps.interior_cost[p], 0.0);
  }

  if (beta > 0.0) {
    for (int ix = 0; ix < g.nx; ++ix)
      for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
          if (ix + 1 < g.nx)
            net.add_arc(node(ix, iy, iz), node(ix + 1, iy, iz), beta, beta);
          if (iy + 1 < g.ny)
            net.add_arc(node(ix, iy, iz), node(ix, iy + 1, iz), beta, beta);
        }
  }

  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      net.add_arc(net.source(), node(ix, iy, 0), FlowNetwork::kInf, 0.0);
      for (int iz = 0; iz + 1 < g.nz; ++iz)
        net.add_arc(node(ix, iy, iz + 1), node(ix, iy, iz), FlowNetwork::kInf,
                    0.0);
    }

  return net;
}

ElevationMap extract_surface(const CutResult& cut, const GroundGrid& grid) {
  ElevationMap map(grid);
  const std::size_t base = 2;  // nodes 0,1 are the terminals
  if (cut.source_side.size() != base + grid.num_voxels())
    throw ConfigError("extract_surface: cut does not match the grid");
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      int top = -1;
      for (int iz = 0; iz < grid.nz; ++iz)
        if (cut.source_side[base + grid.index(ix, iy, iz)]) top = iz;
      if (top < 0)
        throw NumericalError("extract_surface: column with empty interior");
      for (int iz = 0; iz <= top; ++iz)
        if (!cut.source_side[base + grid.index(ix, iy, iz)])
          throw NumericalError(
              "extract_surface: multiple transitions in a column");
      map.at(ix, iy) = grid.z(top);
    }
  return map;
}

double surface_energy(const ElevationMap& map, const MagnitudeVolume& volume,
                      const AcquisitionGeometry& geom, double beta) {
  const GroundGrid& g = volume.grid;
  if (map.nx != g.nx || map.ny != g.ny)
    throw ConfigError("surface_energy: map does not match the grid");
  const RayVolume rays = resample_to_rays(volume, geom);
  const CumulativeProfiles prof = cumulative_profiles(rays);
  const TerminalCaps caps = terminal_caps(rays, prof);

  double energy = 0.0;
  std::vector<int> level(g.num_columns());
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      const int k = level_of(map, g, ix, iy);
      level[g.column_index(ix, iy)] = k;
      for (int iz = 0; iz < g.nz; ++iz) {
        const std::size_t p = g.index(ix, iy, iz);
        energy += iz > k ? caps.air_cost[p] : caps.interior_cost[p];
      }
    }
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      const int k = level[g.column_index(ix, iy)];
      if (ix + 1 < g.nx)
        energy += beta * std::abs(k - level[g.column_index(ix + 1, iy)]);
      if (iy + 1 < g.ny)
        energy += beta * std::abs(k - level[g.column_index(ix, iy + 1)]);
    }
  return energy;
}

ElevationMap segment_surface(const MagnitudeVolume& volume,
                             const AcquisitionGeometry& geom, double beta) {
  const FlowNetwork net = build_graph(volume, geom, beta);
  const CutResult cut = net.max_flow();
  return extract_surface(cut, volume.grid);
}

void apply_shadow_mask(ElevationMap& map, const MagnitudeVolume& volume,
                       const AcquisitionGeometry& geom, double tau_shadow) {
  const GroundGrid& g = volume.grid;
  const RayVolume rays = resample_to_rays(volume, geom);
  const CumulativeProfiles prof = cumulative_profiles(rays);

  std::vector<std::uint8_t> shadowed(g.num_columns(), 0);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      const int k = level_of(map, g, ix, iy);
      int ie = 0, is_surf = 0;
      rays.ray_of_voxel(iy, k, &ie, &is_surf);
      const int col = ix * rays.n_elev + ie;
      const std::size_t base = prof.index(col, 0);

      int occlusion = -1;
      for (int s = 0; s < is_surf && occlusion < 0; ++s) {
        const std::int64_t p = rays.voxel_of_sample[base + s];
        if (p < 0) continue;
        const int qz = static_cast<int>(p % g.nz);
        const int qy = static_cast<int>((p / g.nz) % g.ny);
        if (qy == iy) continue;
        if (g.z(qz) < map.at(ix, qy) - 1e-9) occlusion = s;
      }
      if (occlusion < 0) continue;
      const double total = prof.column_total(col);
      if (total <= 0.0) continue;
      if (prof.cminus[base + occlusion] >= tau_shadow * total)
        shadowed[g.column_index(ix, iy)] = 1;
    }

  // Fill shadowed heights from the first clear column away from the sensor.
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      if (!shadowed[g.column_index(ix, iy)]) continue;
      map.valid[g.column_index(ix, iy)] = 0;
      int donor = -1;
      for (int jy = iy + 1; jy < g.ny; ++jy)
        if (!shadowed[g.column_index(ix, jy)]) {
          donor = jy;
          break;
        }
      if (donor < 0)
        for (int jy = iy - 1; jy >= 0; --jy)
          if (!shadowed[g.column_index(ix, jy)]) {
            donor = jy;
            break;
          }
      if (donor >= 0) map.at(ix, iy) = map.at(ix, donor);
    }
}

std::vector<std::uint8_t> geometric_shadow_mask(
    const ElevationMap& surface, const AcquisitionGeometry& geom,
    const GroundGrid& grid) {
  std::vector<std::uint8_t> mask(grid.num_columns(), 0);
  const double sin_t = geom.sin_theta();
  const double cos_t = geom.cos_theta();
  const double step = std::min(grid.dy, grid.dz);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double y_s = grid.y(iy);
      const double z_s = surface.at(ix, iy);
      // Walk back along the ray from the surface point toward the sensor
      // until leaving the grid.
      for (double t = step; ; t += step) {
        const double y = y_s - t * sin_t;
        const double z = z_s + t * cos_t;
        if (y < grid.y0 - 0.5 * grid.dy || z > grid.z_top() + 0.5 * grid.dz)
          break;
        const int qy = static_cast<int>(std::lround((y - grid.y0) / grid.dy));
        if (qy < 0 || qy >= grid.ny || qy == iy) continue;
        if (z < surface.at(ix, qy) - 0.5 * grid.dz) {
          mask[grid.column_index(ix, iy)] = 1;
          break;
        }
      }
    }
  return mask;
}

}  // namespace tomo
