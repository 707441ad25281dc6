#pragma once

#include <complex>
#include <span>
#include <vector>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// Per radar pixel, an N x N Hermitian sample covariance (row major).
struct CovarianceField {
  int n_images = 0;
  int azimuth_count = 0;
  int range_count = 0;
  std::vector<std::complex<double>> r;

  const std::complex<double>* at(int ia, int ir) const {
    return r.data() + (static_cast<std::size_t>(ia) * range_count + ir) *
                          (static_cast<std::size_t>(n_images) * n_images);
  }
  std::complex<double>* at(int ia, int ir) {
    return r.data() + (static_cast<std::size_t>(ia) * range_count + ir) *
                          (static_cast<std::size_t>(n_images) * n_images);
  }
};

// Local multilooking: R(p) = sum_q w(q) v(q) v(q)^H with Gaussian weights
// normalized to 1 over the window centered on p; windows at the image edge
// are truncated and renormalized.
CovarianceField estimate_covariance(const SARStack& stack, int window_size,
                                    double window_std);

// Height spectra of a single covariance matrix over the given z samples.
// All three return zeros when the covariance is identically zero (no signal).
std::vector<double> beamforming_profile(const std::complex<double>* r, int n,
                                        const AcquisitionGeometry& geom,
                                        std::span<const double> z_samples);
std::vector<double> capon_profile(const std::complex<double>* r, int n,
                                  const AcquisitionGeometry& geom,
                                  std::span<const double> z_samples,
                                  double loading);
std::vector<double> music_profile(const std::complex<double>* r, int n,
                                  const AcquisitionGeometry& geom,
                                  std::span<const double> z_samples,
                                  int model_order);

enum class SpectralMethod { kBeamforming, kCapon, kMusic };

struct SpectralParams {
  int window_size = 7;
  double window_std = 1.5;     // pixels; ~95% of the mass inside a 7x7 window
  double capon_loading = 1e-3; // diagonal loading as a fraction of trace/N
  int music_order = 2;         // D
};

// Profile of every radar cell evaluated at its member voxel heights and
// scattered back onto the ground grid; out-of-swath voxels stay zero.
MagnitudeVolume spectral_volume(const SARStack& stack, const CellMap& map,
                                SpectralMethod method,
                                const SpectralParams& params);

}  // namespace tomo
