#include "tomo/estimators.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "tomo/errors.hpp"

namespace tomo {

namespace {

using cd = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

MatrixXcd to_matrix(const cd* r, int n) {
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = r[static_cast<std::size_t>(i) * n + j];
  return m;
}

void require_hermitian(const MatrixXcd& m, const char* who) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-10 * (scale + 1.0))
    throw ConfigError(std::string(who) + ": covariance is not Hermitian");
}

VectorXcd steering(const AcquisitionGeometry& geom, double z) {
  VectorXcd a(geom.num_images);
  for (int n = 0; n < geom.num_images; ++n) {
    const double phase = -geom.spatial_frequency(n) * z;
    a(n) = cd(std::cos(phase), std::sin(phase));
  }
  return a;
}

}  // namespace

CovarianceField estimate_covariance(const SARStack& stack, int window_size,
                                    double window_std) {
  const RadarGrid& rg = stack.rgrid;
  if (window_size < 1 || window_size % 2 == 0)
    throw ConfigError("estimate_covariance: window_size must be odd");
  if (window_size > rg.azimuth_count || window_size > rg.range_count)
    throw ConfigError("estimate_covariance: window larger than the image");
  if (!(window_std > 0.0))
    throw ConfigError("estimate_covariance: window_std must be > 0");

  const int n = stack.num_images;
  const int half = window_size / 2;
  std::vector<double> w(static_cast<std::size_t>(window_size) * window_size);
  for (int di = -half; di <= half; ++di)
    for (int dj = -half; dj <= half; ++dj)
      w[static_cast<std::size_t>(di + half) * window_size + (dj + half)] =
          std::exp(-0.5 * (di * di + dj * dj) / (window_std * window_std));

  CovarianceField field;
  field.n_images = n;
  field.azimuth_count = rg.azimuth_count;
  field.range_count = rg.range_count;
  field.r.assign(rg.num_pixels() * static_cast<std::size_t>(n) * n,
                 cd(0.0, 0.0));

  std::vector<cd> sample(n);
  for (int ia = 0; ia < rg.azimuth_count; ++ia)
    for (int ir = 0; ir < rg.range_count; ++ir) {
      cd* out = field.at(ia, ir);
      double wsum = 0.0;
      for (int di = -half; di <= half; ++di) {
        const int qa = ia + di;
        if (qa < 0 || qa >= rg.azimuth_count) continue;
        for (int dj = -half; dj <= half; ++dj) {
          const int qr = ir + dj;
          if (qr < 0 || qr >= rg.range_count) continue;
          const double wq =
              w[static_cast<std::size_t>(di + half) * window_size +
                (dj + half)];
          wsum += wq;
          for (int i = 0; i < n; ++i) sample[i] = stack.at(i, qa, qr);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              out[static_cast<std::size_t>(i) * n + j] +=
                  wq * sample[i] * std::conj(sample[j]);
        }
      }
      for (int i = 0; i < n * n; ++i) out[i] /= wsum;
    }
  return field;
}

std::vector<double> beamforming_profile(const cd* r, int n,
                                        const AcquisitionGeometry& geom,
                                        std::span<const double> z_samples) {
  const MatrixXcd m = to_matrix(r, n);
  require_hermitian(m, "beamforming_profile");
  std::vector<double> p(z_samples.size(), 0.0);
  if (m.cwiseAbs().maxCoeff() == 0.0) return p;
  for (std::size_t k = 0; k < z_samples.size(); ++k) {
    const VectorXcd a = steering(geom, z_samples[k]);
    p[k] = std::real(cd(a.adjoint() * m * a)) / (static_cast<double>(n) * n);
  }
  return p;
}

std::vector<double> capon_profile(const cd* r, int n,
                                  const AcquisitionGeometry& geom,
                                  std::span<const double> z_samples,
                                  double loading) {
  const MatrixXcd m = to_matrix(r, n);
  require_hermitian(m, "capon_profile");
  std::vector<double> p(z_samples.size(), 0.0);
  const double tr = std::real(m.trace());
  if (m.cwiseAbs().maxCoeff() == 0.0) return p;

  MatrixXcd loaded = m;
  loaded.diagonal().array() += cd(loading * tr / n, 0.0);
  Eigen::LLT<MatrixXcd> llt(loaded);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "capon_profile: loaded covariance is singular (loading too small)");
  for (std::size_t k = 0; k < z_samples.size(); ++k) {
    const VectorXcd a = steering(geom, z_samples[k]);
    const double q = std::real(cd(a.adjoint() * llt.solve(a)));
    if (!(q > 0.0) || !std::isfinite(q))
      throw NumericalError("capon_profile: non-positive quadratic form");
    p[k] = 1.0 / q;
  }
  return p;
}

std::vector<double> music_profile(const cd* r, int n,
                                  const AcquisitionGeometry& geom,
                                  std::span<const double> z_samples,
                                  int model_order) {
  if (model_order < 1 || model_order >= n)
    throw ConfigError("music_profile: model order must satisfy 1 <= D < N");
  const MatrixXcd m = to_matrix(r, n);
  require_hermitian(m, "music_profile");
  std::vector<double> p(z_samples.size(), 0.0);
  if (m.cwiseAbs().maxCoeff() == 0.0) return p;

  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(m);
  if (eig.info() != Eigen::Success)
    throw NumericalError("music_profile: eigendecomposition failed");
  // Noise subspace: eigenvectors of the N-D smallest eigenvalues
  // (ascending order in Eigen).
  const MatrixXcd noise = eig.eigenvectors().leftCols(n - model_order);
  for (std::size_t k = 0; k < z_samples.size(); ++k) {
    const VectorXcd a = steering(geom, z_samples[k]);
    const double q = (noise.adjoint() * a).squaredNorm();
    p[k] = 1.0 / std::max(q, 1e-300);
  }
  return p;
}

MagnitudeVolume spectral_volume(const SARStack& stack, const CellMap& map,
                                SpectralMethod method,
                                const SpectralParams& params) {
  if (stack.num_images != map.geom().num_images ||
      stack.rgrid.num_pixels() != map.rgrid().num_pixels())
    throw ConfigError("spectral_volume: stack does not match the cell map");
  const CovarianceField cov =
      estimate_covariance(stack, params.window_size, params.window_std);

  const GroundGrid& g = map.grid();
  MagnitudeVolume out(g);
  std::vector<double> zs;
  for (std::size_t c = 0; c < map.num_cells(); ++c) {
    const std::int64_t* begin = map.cell_begin(c);
    const std::int64_t* end = map.cell_end(c);
    if (begin == end) continue;
    zs.clear();
    for (const std::int64_t* it = begin; it != end; ++it)
      zs.push_back(g.z(static_cast<int>(*it % g.nz)));
    const int ia = static_cast<int>(c) / map.rgrid().range_count;
    const int ir = static_cast<int>(c) % map.rgrid().range_count;
    const cd* r = cov.at(ia, ir);

    std::vector<double> prof;
    switch (method) {
      case SpectralMethod::kBeamforming:
        prof = beamforming_profile(r, stack.num_images, map.geom(), zs);
        break;
      case SpectralMethod::kCapon:
        prof = capon_profile(r, stack.num_images, map.geom(), zs,
                             params.capon_loading);
        break;
      case SpectralMethod::kMusic:
        prof = music_profile(r, stack.num_images, map.geom(), zs,
                             params.music_order);
        break;
    }
    for (std::size_t j = 0; j < prof.size(); ++j)
      out.v[static_cast<std::size_t>(begin[j])] = prof[j];
  }
  return out;
}

}  // namespace tomo
