#include "tomo/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "tomo/errors.hpp"

namespace tomo {

namespace {
constexpr double kPi = 3.14159265358979323846;

double snap_small(double v) { return std::abs(v) < 1e-15 ? 0.0 : v; }
}  // namespace

void AcquisitionGeometry::validate() const {
  if (num_images < 2) throw ConfigError("geometry: n_images must be >= 2");
  if (static_cast<int>(baselines.size()) != num_images)
    throw ConfigError("geometry: baselines length must equal n_images");
  if (!(wavelength > 0.0)) throw ConfigError("geometry: wavelength must be > 0");
  if (!(incidence > 0.0) || incidence > kPi / 2 + 1e-12)
    throw ConfigError("geometry: incidence_rad must be in (0, pi/2]");
  if (!(reference_range > 0.0))
    throw ConfigError("geometry: reference_range must be > 0");
  for (double b : baselines)
    if (!std::isfinite(b)) throw ConfigError("geometry: baseline not finite");
  for (int n = 0; n < num_images; ++n)
    if (!std::isfinite(spatial_frequency(n)))
      throw ConfigError("geometry: xi_n not finite");
}

double AcquisitionGeometry::sin_theta() const {
  return snap_small(std::sin(incidence));
}

double AcquisitionGeometry::cos_theta() const {
  return snap_small(std::cos(incidence));
}

double AcquisitionGeometry::spatial_frequency(int n) const {
  if (n < 0 || n >= num_images)
    throw std::out_of_range("spatial_frequency: image index out of range");
  return 4.0 * kPi * baselines[n] / (wavelength * reference_range * sin_theta());
}

double AcquisitionGeometry::slant_range(double y, double z) const {
  return reference_range + y * sin_theta() - z * cos_theta();
}

std::vector<std::complex<double>> AcquisitionGeometry::steering_vector(
    double z) const {
  std::vector<std::complex<double>> a(num_images);
  for (int n = 0; n < num_images; ++n) {
    const double phase = -spatial_frequency(n) * z;
    a[n] = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

void GroundGrid::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("ground_grid: dims must be >= 1");
  if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
    throw ConfigError("ground_grid: spacings must be > 0");
}

void RadarGrid::validate() const {
  if (azimuth_count < 1 || range_count < 1)
    throw ConfigError("radar_grid: counts must be >= 1");
  if (!(d_azimuth > 0.0) || !(d_range > 0.0))
    throw ConfigError("radar_grid: spacings must be > 0");
}

std::optional<RadarCell> radar_cell_of(const AcquisitionGeometry& geom,
                                       const RadarGrid& rgrid,
                                       double x, double y, double z) {
  const double rho = geom.slant_range(y, z);
  // Nearest bin; a value exactly on the boundary between bins ir and ir+1
  // belongs to ir.
  const double rel_r = (rho - rgrid.range_origin) / rgrid.d_range;
  const int ir = static_cast<int>(std::ceil(rel_r - 0.5));
  if (ir < 0 || ir >= rgrid.range_count) return std::nullopt;
  const double rel_a = (x - rgrid.azimuth_origin) / rgrid.d_azimuth;
  const int ia = static_cast<int>(std::ceil(rel_a - 0.5));
  if (ia < 0 || ia >= rgrid.azimuth_count) return std::nullopt;
  return RadarCell{ia, ir};
}

CellMap::CellMap(const AcquisitionGeometry& geom, const RadarGrid& rgrid,
                 const GroundGrid& grid)
    : geom_(geom), rgrid_(rgrid), grid_(grid) {
  geom_.validate();
  rgrid_.validate();
  grid_.validate();

  const std::size_t num_vox = grid.num_voxels();
  const std::size_t num_cells = rgrid.num_pixels();
  cell_of_voxel_.assign(num_vox, -1);
  std::vector<std::int64_t> counts(num_cells, 0);

  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int iz = 0; iz < grid.nz; ++iz) {
        const auto cell =
            radar_cell_of(geom, rgrid, grid.x(ix), grid.y(iy), grid.z(iz));
        if (!cell) continue;
        const std::int64_t c = rgrid.pixel_index(cell->azimuth, cell->range);
        cell_of_voxel_[grid.index(ix, iy, iz)] = c;
        ++counts[c];
      }

  cell_start_.assign(num_cells + 1, 0);
  for (std::size_t c = 0; c < num_cells; ++c) {
    cell_start_[c + 1] = cell_start_[c] + counts[c];
    max_voxels_per_cell_ =
        std::max<std::int64_t>(max_voxels_per_cell_, counts[c]);
  }
  cell_voxels_.resize(cell_start_[num_cells]);
  std::vector<std::int64_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t p = 0; p < num_vox; ++p) {
    const std::int64_t c = cell_of_voxel_[p];
    if (c >= 0) cell_voxels_[cursor[c]++] = static_cast<std::int64_t>(p);
  }

  steer_.resize(static_cast<std::size_t>(grid.nz) * geom.num_images);
  for (int iz = 0; iz < grid.nz; ++iz) {
    const auto a = geom.steering_vector(grid.z(iz));
    for (int n = 0; n < geom.num_images; ++n)
      steer_[static_cast<std::size_t>(iz) * geom.num_images + n] = a[n];
  }
}

}  // namespace tomo
