#pragma once

#include <cstdint>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// Discrete forward operator: v_n(cell) = sum over voxels p of the cell of
// u(p) * exp(-j xi_n z_p). Linear in u; voxels outside the swath contribute
// nothing.
SARStack apply_phi(const ComplexVolume& u, const CellMap& map);

// Adjoint of apply_phi under the standard complex inner products:
// <Phi u, v> = <u, adjoint_phi(v)>.
ComplexVolume adjoint_phi(const SARStack& v, const CellMap& map);

// v = Phi u + eps with eps circular complex Gaussian, per-component std
// sigma. Per-image noise streams are keyed by (seed, image) so images can be
// generated independently without changing the result.
SARStack simulate_stack(const ComplexVolume& u, const CellMap& map,
                        double sigma, std::uint64_t seed);

}  // namespace tomo
