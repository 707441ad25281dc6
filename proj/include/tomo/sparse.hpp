#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// Nonnegative sparsity weight per voxel, or a scalar broadcast over the grid.
class SparsityMap {
 public:
  static SparsityMap Uniform(double mu);
  static SparsityMap PerVoxel(std::vector<double> values);

  bool is_uniform() const { return uniform_; }
  double at(std::size_t voxel) const {
    return uniform_ ? scalar_ : values_[voxel];
  }
  double mean(std::size_t num_voxels) const;
  const std::vector<double>& values() const { return values_; }
  void validate(std::size_t num_voxels) const;

 private:
  bool uniform_ = true;
  double scalar_ = 0.0;
  std::vector<double> values_;
};

struct SolverParams {
  int max_iterations = 2000;
  double tolerance = 1e-8;   // relative objective change
  bool accelerated = true;   // FISTA with restart on objective increase
  double step_safety = 0.95; // step = step_safety / ||Phi||^2
  // Convergence certificate: keep iterating until the KKT residual drops
  // below kkt_target_factor * mean(mu) (skipped when mean(mu) = 0).
  double kkt_target_factor = 1e-4;
  bool record_kkt_trace = false;

  void validate() const;
};

struct SolveInfo {
  int iterations = 0;
  double objective = 0.0;
  double kkt = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> kkt_trace;  // filled when record_kkt_trace is set
};

// Proximal map of t*|.| for complex values: shrinks the modulus by t and
// keeps the phase; zero when |x| <= t.
inline std::complex<double> soft_threshold(std::complex<double> x, double t) {
  const double m = std::abs(x);
  if (m <= t) return {0.0, 0.0};
  return x * ((m - t) / m);
}

// Power-iteration estimate of ||Phi||^2. With the cell-partition structure
// the exact value is N * (max voxels per cell) whenever the steering vectors
// within a cell are nearly coherent.
double operator_norm_sq(const CellMap& map, int iters);

// Minimizes ||Phi u - v||^2 + sum_p mu(p) |u(p)| by proximal gradient
// (accelerated by default, monotone plain mode for tests). Convergence is
// certified by the KKT residual reported in SolveInfo. Throws NumericalError
// when the objective grows past 10x its initial value.
ComplexVolume invert_l1_3d(const SARStack& stack, const CellMap& map,
                           const SparsityMap& mu, const SolverParams& params,
                           SolveInfo* info = nullptr,
                           const ComplexVolume* warm_start = nullptr);

// Max violation of the LASSO optimality conditions for the objective above:
// off the support |2 Phi^H(Phi u - v)| must not exceed mu, on the support the
// full subgradient must vanish.
double kkt_residual(const ComplexVolume& u, const SARStack& stack,
                    const CellMap& map, const SparsityMap& mu);

// Per-cell variant: solves the same l1 problem independently on every radar
// cell with the dense steering matrix of the cell's voxel heights. Equivalent
// to invert_l1_3d with uniform mu since the cells partition the voxels.
ComplexVolume invert_cs_per_cell(const SARStack& stack, const CellMap& map,
                                 double mu, const SolverParams& params,
                                 SolveInfo* info = nullptr);

}  // namespace tomo
