#pragma once

#include <cstdint>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/maxflow.hpp"
#include "tomo/rays.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// Per ray column: C-(s) = d_ray * sum of |u| at samples q <= s (mass from the
// antenna through s) and C+(s) = d_ray * sum over q > s (mass beyond s).
// C- + C+ is the column total at every sample. r_equi is the first sample
// where C- >= C+.
struct CumulativeProfiles {
  int n_columns = 0;
  int n_samples = 0;
  double d_ray = 0.0;
  std::vector<double> cminus;
  std::vector<double> cplus;
  std::vector<int> r_equi;

  std::size_t index(int column, int s) const {
    return static_cast<std::size_t>(column) * n_samples + s;
  }
  double column_total(int column) const {
    return cminus[index(column, n_samples - 1)];
  }
};

CumulativeProfiles cumulative_profiles(const RayVolume& rays);

// Surface-placement penalty of one column:
//   D(r) = d_ray * ( sum_{s<r} [C-(s)-C+(s)]+  +  sum_{s>=r} [C+(s)-C-(s)]+ )
// Nonincreasing before r_equi, nondecreasing after, minimal at r_equi.
double data_penalty(const CumulativeProfiles& profiles, int column, int r);

// Ray-accumulated terminal capacities per voxel. air_cost is paid when the
// voxel lies above the surface (radar side), interior_cost when at or below.
// Voxels hit by no ray sample carry zeros.
struct TerminalCaps {
  std::vector<double> air_cost;
  std::vector<double> interior_cost;
};

TerminalCaps terminal_caps(const RayVolume& rays,
                           const CumulativeProfiles& profiles);

// Flow network of the surface problem. Voxel p maps to node 2 + p (0 and 1
// are source and sink). Sink side = air, source side = interior. Descending
// infinite arcs along z keep interiors downward-closed; an infinite
// source arc pins the bottom voxel of every column to the interior.
FlowNetwork build_graph(const MagnitudeVolume& volume,
                        const AcquisitionGeometry& geom, double beta);

// Reads the elevation map off a cut of build_graph's network: per column the
// boundary between interior (source side) and air. Throws NumericalError if
// any column is not monotone.
ElevationMap extract_surface(const CutResult& cut, const GroundGrid& grid);

// Discrete energy of an elevation map: accumulated data cost of the induced
// labeling plus beta per severed smoothness arc (|dE|/dz per neighbor pair).
// Equals the cut cost of the induced labeling in build_graph's network.
double surface_energy(const ElevationMap& map, const MagnitudeVolume& volume,
                      const AcquisitionGeometry& geom, double beta);

// resample -> profiles -> graph -> max-flow -> extract. Global minimizer of
// surface_energy; ties resolve to the lowest surface.
ElevationMap segment_surface(const MagnitudeVolume& volume,
                             const AcquisitionGeometry& geom, double beta);

// Marks columns whose surface point is occluded by a nearer column and whose
// ray mass is almost entirely (>= tau_shadow of the column total) in front of
// the occlusion. Shadowed columns get valid = 0 and their height filled from
// the first valid column away from the sensor.
void apply_shadow_mask(ElevationMap& map, const MagnitudeVolume& volume,
                       const AcquisitionGeometry& geom, double tau_shadow);

// Geometry-only occlusion test against a reference surface (no mass
// criterion); used to exclude true shadow zones when scoring against a known
// ground truth.
std::vector<std::uint8_t> geometric_shadow_mask(
    const ElevationMap& surface, const AcquisitionGeometry& geom,
    const GroundGrid& grid);

}  // namespace tomo
