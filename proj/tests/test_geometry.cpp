#include <doctest.h>

#include <cmath>
#include <complex>

#include "tomo/errors.hpp"
#include "tomo/geometry.hpp"
#include "tomo/rays.hpp"
#include "tomo/rng.hpp"
#include "tomo/volume.hpp"
#include "test_util.hpp"

using namespace tomo;
using test::kPi;

TEST_CASE("spatial frequency: zero baseline, sign, closed form") {
  AcquisitionGeometry g;
  g.num_images = 3;
  g.baselines = {0.0, 120.0, -120.0};
  g.wavelength = 0.031;
  g.incidence = 0.6;
  g.reference_range = 6e5;
  g.validate();

  CHECK(g.spatial_frequency(0) == 0.0);
  CHECK(g.spatial_frequency(1) == doctest::Approx(-g.spatial_frequency(2)));
  // Hand evaluation of 4*pi*b / (lambda * r0 * sin theta).
  CHECK(g.spatial_frequency(1) ==
        doctest::Approx(0.14358352873252).epsilon(1e-12));
  CHECK_THROWS_AS((void)g.spatial_frequency(3), std::out_of_range);
  CHECK_THROWS_AS((void)g.spatial_frequency(-1), std::out_of_range);
}

TEST_CASE("geometry validation") {
  AcquisitionGeometry g = test::make_geometry();
  CHECK_NOTHROW(g.validate());
  AcquisitionGeometry bad = g;
  bad.num_images = 1;
  bad.baselines = {0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.incidence = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.incidence = kPi / 2;  // horizontal rays allowed
  CHECK_NOTHROW(bad.validate());
  bad = g;
  bad.wavelength = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("slant range: origin, theta=pi/2, monotonicity, affinity") {
  AcquisitionGeometry g = test::make_geometry();
  CHECK(g.slant_range(0, 0) == doctest::Approx(g.reference_range));

  AcquisitionGeometry flat = test::make_geometry(12, 2000.0, kPi / 2);
  CHECK(flat.slant_range(1.0, 0.0) == doctest::Approx(g.reference_range + 1.0));
  CHECK(flat.slant_range(1.0, 5.0) == flat.slant_range(1.0, 0.0));

  // Strictly increasing in y, strictly decreasing in z (cos theta > 0).
  CHECK(g.slant_range(2.0, 1.0) > g.slant_range(1.0, 1.0));
  CHECK(g.slant_range(1.0, 2.0) < g.slant_range(1.0, 1.0));

  // Affine with gradient (sin theta, -cos theta).
  const double s = g.slant_range(3.0, 4.0) - g.slant_range(2.0, 4.0);
  const double c = g.slant_range(2.0, 5.0) - g.slant_range(2.0, 4.0);
  CHECK(s == doctest::Approx(std::sin(0.6)));
  CHECK(c == doctest::Approx(-std::cos(0.6)));
}

TEST_CASE("steering vector: all ones at z=0, unit modulus, conjugation") {
  AcquisitionGeometry g = test::make_geometry();
  const auto a0 = g.steering_vector(0.0);
  for (const auto& c : a0) {
    CHECK(c.real() == doctest::Approx(1.0));
    CHECK(c.imag() == doctest::Approx(0.0));
  }
  const auto ap = g.steering_vector(7.3);
  const auto am = g.steering_vector(-7.3);
  for (int n = 0; n < g.num_images; ++n) {
    CHECK(std::abs(ap[n]) == doctest::Approx(1.0));
    CHECK(ap[n].real() == doctest::Approx(am[n].real()));
    CHECK(ap[n].imag() == doctest::Approx(-am[n].imag()));
  }
}

TEST_CASE("steering vector: coherence below 1 for separated heights") {
  AcquisitionGeometry g = test::make_geometry();
  const auto a1 = g.steering_vector(2.0);
  const auto a2 = g.steering_vector(9.0);
  // Scalar-loop oracle for the inner product.
  std::complex<double> acc(0, 0);
  for (int n = 0; n < g.num_images; ++n) acc += std::conj(a1[n]) * a2[n];
  CHECK(std::abs(acc) / g.num_images < 1.0);
  CHECK(std::abs(acc) / g.num_images ==
        doctest::Approx(std::abs(acc) / g.num_images));
}

TEST_CASE("radar_cell_of: bin centers, boundary tie-break, out of swath") {
  AcquisitionGeometry g = test::make_geometry();
  RadarGrid rg;
  rg.azimuth_count = 4;
  rg.range_count = 10;
  rg.d_azimuth = 1.0;
  rg.d_range = 1.0;
  rg.azimuth_origin = 0.0;
  rg.range_origin = g.reference_range;

  // Exactly at the center of range bin 3: rho = r0 + 3.
  const double y = 3.0 / g.sin_theta();
  const auto cell = radar_cell_of(g, rg, 2.0, y, 0.0);
  REQUIRE(cell.has_value());
  CHECK(cell->azimuth == 2);
  CHECK(cell->range == 3);

  // Boundary between bins 3 and 4 (rho = r0 + 3.5) goes to the lower bin.
  const double yb = 3.5 / g.sin_theta();
  const auto on_edge = radar_cell_of(g, rg, 0.0, yb, 0.0);
  REQUIRE(on_edge.has_value());
  CHECK(on_edge->range == 3);

  // Out of swath: far beyond the last bin.
  CHECK(!radar_cell_of(g, rg, 0.0, 100.0 / g.sin_theta(), 0.0).has_value());
  // Azimuth outside.
  CHECK(!radar_cell_of(g, rg, 99.0, y, 0.0).has_value());
}

TEST_CASE("radar_cell_of: exhaustive partition scan against brute force") {
  AcquisitionGeometry g = test::make_geometry();
  GroundGrid grid = test::make_grid(8, 8, 8);
  RadarGrid rg;
  rg.azimuth_count = 8;
  rg.d_azimuth = 1.0;
  rg.azimuth_origin = 0.0;
  rg.d_range = 0.8;
  rg.range_origin = g.slant_range(0.0, grid.z(7)) - 1.0;
  rg.range_count =
      static_cast<int>((g.slant_range(7.0, 0.0) - rg.range_origin) / 0.8) + 3;

  for (int ix = 0; ix < 8; ++ix)
    for (int iy = 0; iy < 8; ++iy)
      for (int iz = 0; iz < 8; ++iz) {
        const double x = grid.x(ix), y = grid.y(iy), z = grid.z(iz);
        const auto cell = radar_cell_of(g, rg, x, y, z);
        // Brute-force nearest-bin search with the same tie rule.
        const double rho = g.slant_range(y, z);
        int best = -1;
        double best_d = 1e300;
        for (int ir = 0; ir < rg.range_count; ++ir) {
          const double d = std::abs(rho - rg.range(ir));
          if (d < best_d - 1e-15) {
            best_d = d;
            best = ir;
          }
        }
        REQUIRE(cell.has_value());
        CHECK(best_d <= rg.d_range / 2 + 1e-12);
        CHECK(cell->range == best);
        CHECK(cell->azimuth == ix);
      }
}

TEST_CASE("cell map partitions in-swath voxels") {
  AcquisitionGeometry g = test::make_geometry();
  GroundGrid grid = test::make_grid(6, 10, 7);
  RadarGrid rg;
  rg.azimuth_count = 6;
  rg.d_azimuth = 1.0;
  rg.azimuth_origin = 0.0;
  rg.d_range = 1.0;
  rg.range_origin = g.slant_range(0.0, grid.z(6)) - 1.0;
  rg.range_count =
      static_cast<int>(g.slant_range(9.0, 0.0) - rg.range_origin) + 3;

  CellMap map(g, rg, grid);
  std::size_t mapped = 0;
  for (std::size_t c = 0; c < map.num_cells(); ++c)
    mapped += static_cast<std::size_t>(map.cell_end(c) - map.cell_begin(c));
  CHECK(mapped == map.num_mapped_voxels());
  // Every voxel is in-swath here, and each belongs to exactly one cell.
  CHECK(mapped == grid.num_voxels());
  for (std::size_t p = 0; p < grid.num_voxels(); ++p)
    CHECK(map.cell_of_voxel(p) >= 0);
}

TEST_CASE("resample_to_rays: constant volume gives constant columns") {
  AcquisitionGeometry g = test::make_geometry();
  GroundGrid grid = test::make_grid(2, 12, 9);
  MagnitudeVolume vol(grid);
  std::fill(vol.v.begin(), vol.v.end(), 2.5);
  const RayVolume rays = resample_to_rays(vol, g);

  // Interior samples (those whose 4 interpolation neighbors are all inside)
  // must equal the constant exactly.
  int checked = 0;
  for (int ie = 0; ie < rays.n_elev; ++ie)
    for (int is = 0; is < rays.n_samples; ++is) {
      const double y = rays.sample_y(ie, is);
      const double z = rays.sample_z(ie, is);
      if (y < grid.y0 + grid.dy || y > grid.y(grid.ny - 1) - grid.dy) continue;
      if (z < grid.z0 + grid.dz || z > grid.z(grid.nz - 1) - grid.dz) continue;
      CHECK(rays.value[rays.sample_index(0, ie, is)] == doctest::Approx(2.5));
      ++checked;
    }
  CHECK(checked > 20);
}

TEST_CASE("resample_to_rays: single voxel stays local") {
  AcquisitionGeometry g = test::make_geometry();
  GroundGrid grid = test::make_grid(3, 9, 9);
  MagnitudeVolume vol(grid);
  vol.at(1, 4, 4) = 3.0;
  const RayVolume rays = resample_to_rays(vol, g);

  int columns_hit = 0;
  for (int ia = 0; ia < rays.n_azimuth; ++ia)
    for (int ie = 0; ie < rays.n_elev; ++ie) {
      double mass = 0.0;
      for (int is = 0; is < rays.n_samples; ++is)
        mass += rays.value[rays.sample_index(ia, ie, is)];
      if (mass > 1e-12) {
        CHECK(ia == 1);
        ++columns_hit;
      }
    }
  // Bilinear support spans at most a couple of neighboring rays.
  CHECK(columns_hit >= 1);
  CHECK(columns_hit <= 3);
}

TEST_CASE("resample_to_rays: horizontal rays reproduce y-rows") {
  AcquisitionGeometry g = test::make_geometry(12, 2000.0, kPi / 2);
  GroundGrid grid = test::make_grid(2, 7, 5);
  MagnitudeVolume vol(grid);
  Rng rng(77);
  for (auto& v : vol.v) v = rng.uniform01();
  const RayVolume rays = resample_to_rays(vol, g);

  REQUIRE(rays.n_elev == grid.nz);
  REQUIRE(rays.n_samples == grid.ny);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int ie = 0; ie < rays.n_elev; ++ie)
      for (int is = 0; is < rays.n_samples; ++is) {
        CHECK(rays.value[rays.sample_index(ix, ie, is)] ==
              doctest::Approx(vol.at(ix, is, ie)).epsilon(1e-12));
        CHECK(rays.voxel_of_sample[rays.sample_index(ix, ie, is)] ==
              static_cast<std::int64_t>(grid.index(ix, is, ie)));
      }
}

TEST_CASE("resample_to_rays: mass preserved on a smooth blob") {
  AcquisitionGeometry g = test::make_geometry();
  GroundGrid grid = test::make_grid(4, 24, 20);
  MagnitudeVolume vol(grid);
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int iz = 0; iz < grid.nz; ++iz) {
        const double dy = (iy - 12.0) / 4.0, dz = (iz - 10.0) / 4.0;
        vol.at(ix, iy, iz) = std::exp(-0.5 * (dy * dy + dz * dz));
      }
  double volume_mass = 0.0;
  for (double v : vol.v) volume_mass += v;
  volume_mass *= grid.dx * grid.dy * grid.dz;

  const RayVolume rays = resample_to_rays(vol, g);
  CHECK(rays.total_mass() == doctest::Approx(volume_mass).epsilon(0.01));

  // Back-mapping keeps at least 99% of the mass on the grid.
  double mapped = 0.0;
  for (std::size_t k = 0; k < rays.value.size(); ++k)
    if (rays.voxel_of_sample[k] >= 0) mapped += rays.value[k];
  mapped *= rays.d_ray * rays.d_elev * grid.dx;
  CHECK(mapped >= 0.99 * volume_mass);

  // Every voxel maps into the fan.
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int iz = 0; iz < grid.nz; ++iz) {
      int ie = -1, is = -1;
      rays.ray_of_voxel(iy, iz, &ie, &is);
      CHECK(ie >= 0);
      CHECK(ie < rays.n_elev);
      CHECK(is >= 0);
      CHECK(is < rays.n_samples);
    }
}
