#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tomo/geometry.hpp"
#include "tomo/volume.hpp"

namespace tomo {

// Content hashing for manifests and reproducibility checks.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);
std::string geometry_hash(const AcquisitionGeometry& geom);

// Stack file: text header (key value per line, "end_header" sentinel), then
// raw little-endian float32 pairs (re, im), image-major then azimuth then
// range.
void write_stack(const std::filesystem::path& path, const SARStack& stack,
                 const std::string& geom_hash);
SARStack read_stack(const std::filesystem::path& path,
                    std::string* geom_hash = nullptr);

// Volume files share the header scheme with 3-D dims; kind is complex64
// (re,im pairs) or magnitude32 (one float per voxel). Voxel order is x-major,
// then y, then z.
void write_complex_volume(const std::filesystem::path& path,
                          const ComplexVolume& u);
ComplexVolume read_complex_volume(const std::filesystem::path& path);
void write_magnitude_volume(const std::filesystem::path& path,
                            const MagnitudeVolume& m);
MagnitudeVolume read_magnitude_volume(const std::filesystem::path& path);

// Elevation map exports: CSV grid (with enough metadata to read back),
// 16-bit PGM with affine height scaling recorded in a comment, and ASCII PLY
// with a height color ramp per vertex.
void write_surface_csv(const std::filesystem::path& path,
                       const ElevationMap& map);
ElevationMap read_surface_csv(const std::filesystem::path& path);
void write_surface_pgm(const std::filesystem::path& path,
                       const ElevationMap& map);
void write_surface_ply(const std::filesystem::path& path,
                       const ElevationMap& map);

}  // namespace tomo
