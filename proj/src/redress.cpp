#include "tomo/redress.hpp"

#include <cmath>
#include <limits>

#include "tomo/errors.hpp"
#include "tomo/forward_model.hpp"
#include "tomo/io.hpp"
#include "tomo/segmentation.hpp"

namespace tomo {

void RedressParams::validate() const {
  if (iterations < 2) throw ConfigError("redress: iterations must be >= 2");
  if (!(mu0 >= 0.0)) throw ConfigError("redress: mu0 must be >= 0");
  if (!(b >= 0.0)) throw ConfigError("redress: b must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("redress: beta must be >= 0");
  solver.validate();
}

namespace {

constexpr double kFar = 1e15;

// 1-D squared distance transform (lower envelope of parabolas).
void dt_1d(const double* f, int n, int stride, double* out, int* v, double* z,
           double* scratch) {
  for (int q = 0; q < n; ++q) scratch[q] = f[static_cast<std::size_t>(q) * stride];
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((scratch[q] + q * q) - (scratch[p] + p * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    out[static_cast<std::size_t>(q) * stride] = dq * dq + scratch[v[k]];
  }
}

}  // namespace

MagnitudeVolume distance_to_surface(const ElevationMap& map,
                                    const GroundGrid& grid) {
  if (map.nx != grid.nx || map.ny != grid.ny)
    throw ConfigError("distance_to_surface: map does not match the grid");

  MagnitudeVolume d2(grid);
  std::fill(d2.v.begin(), d2.v.end(), kFar);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      const double rel = (map.at(ix, iy) - grid.z0) / grid.dz;
      const int k = static_cast<int>(std::lround(rel));
      if (k < 0 || k >= grid.nz)
        throw ConfigError("distance_to_surface: elevation outside the grid");
      d2.at(ix, iy, k) = 0.0;
    }

  const int n_max = std::max({grid.nx, grid.ny, grid.nz});
  std::vector<int> v(n_max);
  std::vector<double> z(n_max + 1), scratch(n_max);

  // Separable passes; each transforms one axis of the squared distance.
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy) {
      double* col = d2.v.data() + grid.index(ix, iy, 0);
      dt_1d(col, grid.nz, 1, col, v.data(), z.data(), scratch.data());
    }
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iz = 0; iz < grid.nz; ++iz) {
      double* row = d2.v.data() + grid.index(ix, 0, iz);
      dt_1d(row, grid.ny, grid.nz, row, v.data(), z.data(), scratch.data());
    }
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int iz = 0; iz < grid.nz; ++iz) {
      double* pil = d2.v.data() + grid.index(0, iy, iz);
      dt_1d(pil, grid.nx, grid.ny * grid.nz, pil, v.data(), z.data(),
            scratch.data());
    }

  for (double& x : d2.v) x = std::sqrt(x);
  return d2;
}

SparsityMap mu_map(const ElevationMap& map, const GroundGrid& grid, int k,
                   const RedressParams& params) {
  params.validate();
  const int n = params.iterations;
  if (k < 0 || k >= n)
    throw ConfigError("mu_map: iteration index must satisfy 0 <= k < n");
  if (k == 0 || params.b == 0.0) return SparsityMap::Uniform(params.mu0);

  const MagnitudeVolume d = distance_to_surface(map, grid);
  const double ramp = static_cast<double>(k) / static_cast<double>(n - k);
  const double scale = params.b / (static_cast<double>(n - 1) * (n - 1));
  std::vector<double> mu(d.v.size());
  for (std::size_t p = 0; p < d.v.size(); ++p) {
    const double rd = ramp * d.v[p];
    mu[p] = params.mu0 + scale * rd * rd;
  }
  return SparsityMap::PerVoxel(std::move(mu));
}

RedressResult redress(const SARStack& stack, const CellMap& map,
                      const RedressParams& params) {
  params.validate();
  const GroundGrid& grid = map.grid();
  const bool checkpoint = !params.checkpoint_dir.empty();

  RedressResult result;
  SparsityMap mu = SparsityMap::Uniform(params.mu0);
  ComplexVolume u;
  bool have_u = false;

  for (int k = 0; k < params.iterations; ++k) {
    if (k > 0) mu = mu_map(result.surface, grid, k, params);

    SolveInfo info;
    u = invert_l1_3d(stack, map, mu, params.solver, &info,
                     params.warm_start && have_u ? &u : nullptr);
    have_u = true;

    const MagnitudeVolume mag = magnitudes(u);
    result.surface = segment_surface(mag, map.geom(), params.beta);

    RedressIteration it;
    it.mu_mean = mu.mean(grid.num_voxels());
    it.objective = info.objective;
    it.kkt = info.kkt;
    it.solver_iterations = info.iterations;
    it.surface_energy =
        surface_energy(result.surface, mag, map.geom(), params.beta);
    const MagnitudeVolume d = distance_to_surface(result.surface, grid);
    for (std::size_t p = 0; p < u.v.size(); ++p) {
      if (u.v[p] == std::complex<double>(0.0, 0.0)) continue;
      ++it.support_size;
      if (d.v[p] >= 1.0) ++it.off_surface_support;
    }
    result.iterations.push_back(it);

    if (checkpoint) {
      const auto dir =
          params.checkpoint_dir / ("iter_" + std::to_string(k));
      std::filesystem::create_directories(dir);
      write_complex_volume(dir / "volume.bin", u);
      write_surface_csv(dir / "surface.csv", result.surface);
      MagnitudeVolume mu_vol(grid);
      for (std::size_t p = 0; p < mu_vol.v.size(); ++p) mu_vol.v[p] = mu.at(p);
      write_magnitude_volume(dir / "mu.bin", mu_vol);
    }
  }

  result.reflectivity = std::move(u);
  return result;
}

}  // namespace tomo
