#pragma once

#include <filesystem>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/sparse.hpp"
#include "tomo/volume.hpp"

namespace tomo {

struct RedressParams {
  int iterations = 5;    // n, total inversion/segmentation rounds
  double mu0 = 0.0;      // base sparsity on the surface
  double b = 0.0;        // extra sparsity reached off-surface at the last round
  double beta = 2.0;     // segmentation smoothness
  double tau_shadow = 0.95;
  bool warm_start = true;
  SolverParams solver;
  std::filesystem::path checkpoint_dir;  // empty disables checkpoints

  void validate() const;
};

// Exact Euclidean distance transform, in voxel index units, from every voxel
// to the surface voxel set {(x, y, E(x,y))}. Zero exactly on surface voxels.
MagnitudeVolume distance_to_surface(const ElevationMap& map,
                                    const GroundGrid& grid);

// Sparsity schedule of round k (0-based, k <= n-1):
//   mu_k(p) = mu0 + b/(n-1)^2 * ( k/(n-k) * d(p,S) )^2
// so the surface keeps mu0 at every round and off-surface voxels reach
// mu0 + b per unit distance at the last round.
SparsityMap mu_map(const ElevationMap& map, const GroundGrid& grid, int k,
                   const RedressParams& params);

struct RedressIteration {
  double mu_mean = 0.0;
  double objective = 0.0;
  double kkt = 0.0;
  int solver_iterations = 0;
  double surface_energy = 0.0;
  std::size_t support_size = 0;          // nonzeros of u
  std::size_t off_surface_support = 0;   // nonzeros at distance >= 1
};

struct RedressResult {
  ComplexVolume reflectivity;
  ElevationMap surface;
  std::vector<RedressIteration> iterations;
};

// Alternates l1 inversion and graph-cut segmentation: round 0 inverts with
// the uniform map mu0, every later round rebuilds mu from the previous
// surface. beta stays fixed across rounds.
RedressResult redress(const SARStack& stack, const CellMap& map,
                      const RedressParams& params);

}  // namespace tomo
