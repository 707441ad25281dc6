#include "tomo/forward_model.hpp"

#include "tomo/errors.hpp"
#include "tomo/rng.hpp"

namespace tomo {

SARStack apply_phi(const ComplexVolume& u, const CellMap& map) {
  const GroundGrid& g = map.grid();
  if (u.v.size() != g.num_voxels())
    throw ConfigError("apply_phi: volume does not match the cell map grid");
  const int n_img = map.geom().num_images;
  SARStack stack(map.rgrid(), n_img);
  const std::size_t npix = map.rgrid().num_pixels();
  const int nz = g.nz;
  for (std::size_t c = 0; c < map.num_cells(); ++c) {
    for (const std::int64_t* it = map.cell_begin(c); it != map.cell_end(c);
         ++it) {
      const std::size_t p = static_cast<std::size_t>(*it);
      const std::complex<double> up = u.v[p];
      if (up == std::complex<double>(0.0, 0.0)) continue;
      const int iz = static_cast<int>(p % nz);
      const std::complex<double>* a = map.steering_row(iz);
      for (int n = 0; n < n_img; ++n)
        stack.v[static_cast<std::size_t>(n) * npix + c] += up * a[n];
    }
  }
  return stack;
}

ComplexVolume adjoint_phi(const SARStack& v, const CellMap& map) {
  const int n_img = map.geom().num_images;
  if (v.num_images != n_img ||
      v.rgrid.num_pixels() != map.rgrid().num_pixels())
    throw ConfigError("adjoint_phi: stack does not match the cell map");
  ComplexVolume out(map.grid());
  const std::size_t npix = map.rgrid().num_pixels();
  const int nz = map.grid().nz;
  for (std::size_t c = 0; c < map.num_cells(); ++c) {
    for (const std::int64_t* it = map.cell_begin(c); it != map.cell_end(c);
         ++it) {
      const std::size_t p = static_cast<std::size_t>(*it);
      const int iz = static_cast<int>(p % nz);
      const std::complex<double>* a = map.steering_row(iz);
      std::complex<double> acc(0.0, 0.0);
      for (int n = 0; n < n_img; ++n)
        acc += std::conj(a[n]) * v.v[static_cast<std::size_t>(n) * npix + c];
      out.v[p] = acc;
    }
  }
  return out;
}

SARStack simulate_stack(const ComplexVolume& u, const CellMap& map,
                        double sigma, std::uint64_t seed) {
  if (sigma < 0) throw ConfigError("simulate_stack: sigma must be >= 0");
  SARStack stack = apply_phi(u, map);
  if (sigma == 0.0) return stack;
  const std::size_t npix = map.rgrid().num_pixels();
  for (int n = 0; n < stack.num_images; ++n) {
    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(n)));
    for (std::size_t q = 0; q < npix; ++q) {
      const double re = rng.normal();
      const double im = rng.normal();
      stack.v[static_cast<std::size_t>(n) * npix + q] +=
          std::complex<double>(sigma * re, sigma * im);
    }
  }
  return stack;
}

MagnitudeVolume magnitudes(const ComplexVolume& u) {
  MagnitudeVolume m(u.grid);
  for (std::size_t i = 0; i < u.v.size(); ++i) m.v[i] = std::abs(u.v[i]);
  return m;
}

}  // namespace tomo
