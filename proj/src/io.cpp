#include "tomo/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "tomo/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace tomo {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_f32(std::ostream& os, double v) {
  const float f = static_cast<float>(v);
  os.write(reinterpret_cast<const char*>(&f), sizeof(float));
}

float read_f32(std::istream& is) {
  float f = 0.0f;
  is.read(reinterpret_cast<char*>(&f), sizeof(float));
  return f;
}

// Reads "key value..." header lines until end_header; returns them as a map
// preserving strictness: callers pull each expected key exactly once.
struct Header {
  std::vector<std::pair<std::string, std::string>> entries;

  std::string take(const std::string& key) {
    for (auto& [k, v] : entries)
      if (k == key) {
        std::string out = v;
        k.clear();
        return out;
      }
    throw IoError("file header: missing key '" + key + "'");
  }
  void expect_consumed(const std::string& context) const {
    for (const auto& [k, v] : entries)
      if (!k.empty())
        throw IoError(context + ": unexpected header key '" + k + "'");
  }
};

Header read_header(std::istream& is, const std::string& magic) {
  std::string line;
  if (!std::getline(is, line) || line != magic + " 1")
    throw IoError("not a " + magic + " file");
  Header h;
  while (std::getline(is, line)) {
    if (line == "end_header") return h;
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw IoError(magic + ": malformed header line '" + line + "'");
    h.entries.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  throw IoError(magic + ": missing end_header");
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw IoError("malformed integer '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof(buf));
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string geometry_hash(const AcquisitionGeometry& geom) {
  std::ostringstream os;
  os << geom.num_images;
  for (double b : geom.baselines) os << ';' << fmt_double(b);
  os << ';' << fmt_double(geom.wavelength) << ';' << fmt_double(geom.incidence)
     << ';' << fmt_double(geom.reference_range);
  const std::string s = os.str();
  return hex64(fnv1a64(s.data(), s.size()));
}

void write_stack(const std::filesystem::path& path, const SARStack& stack,
                 const std::string& geom_hash) {
  std::ofstream os = open_out(path);
  os << "TOMOSTACK 1\n";
  os << "n_images " << stack.num_images << '\n';
  os << "azimuth_count " << stack.rgrid.azimuth_count << '\n';
  os << "range_count " << stack.rgrid.range_count << '\n';
  os << "d_azimuth " << fmt_double(stack.rgrid.d_azimuth) << '\n';
  os << "d_range " << fmt_double(stack.rgrid.d_range) << '\n';
  os << "azimuth_origin " << fmt_double(stack.rgrid.azimuth_origin) << '\n';
  os << "range_origin " << fmt_double(stack.rgrid.range_origin) << '\n';
  os << "geometry_hash " << geom_hash << '\n';
  os << "data complex64\n";
  os << "end_header\n";
  for (const auto& z : stack.v) {
    write_f32(os, z.real());
    write_f32(os, z.imag());
  }
  if (!os) throw IoError("write failed: " + path.string());
}

SARStack read_stack(const std::filesystem::path& path, std::string* geom_hash) {
  std::ifstream is = open_in(path);
  Header h = read_header(is, "TOMOSTACK");
  SARStack stack;
  stack.num_images = to_int(h.take("n_images"));
  stack.rgrid.azimuth_count = to_int(h.take("azimuth_count"));
  stack.rgrid.range_count = to_int(h.take("range_count"));
  stack.rgrid.d_azimuth = to_double(h.take("d_azimuth"));
  stack.rgrid.d_range = to_double(h.take("d_range"));
  stack.rgrid.azimuth_origin = to_double(h.take("azimuth_origin"));
  stack.rgrid.range_origin = to_double(h.take("range_origin"));
  const std::string hash = h.take("geometry_hash");
  if (geom_hash) *geom_hash = hash;
  if (h.take("data") != "complex64")
    throw IoError("stack: unsupported data kind");
  h.expect_consumed("stack");
  stack.rgrid.validate();
  if (stack.num_images < 1 || stack.num_images > 1 << 16)
    throw IoError("stack: bad n_images");
  const std::size_t total = static_cast<std::size_t>(stack.num_images) *
                            stack.rgrid.num_pixels();
  if (total > (1ull << 31)) throw IoError("stack: implausible dimensions");
  stack.v.resize(total);
  for (auto& z : stack.v) {
    const float re = read_f32(is);
    const float im = read_f32(is);
    z = {re, im};
  }
  if (!is) throw IoError("stack: truncated body in " + path.string());
  return stack;
}

namespace {

void write_volume_header(std::ostream& os, const GroundGrid& g,
                         const char* kind) {
  os << "TOMOVOLUME 1\n";
  os << "nx " << g.nx << "\nny " << g.ny << "\nnz " << g.nz << '\n';
  os << "dx " << fmt_double(g.dx) << "\ndy " << fmt_double(g.dy) << "\ndz "
     << fmt_double(g.dz) << '\n';
  os << "x0 " << fmt_double(g.x0) << "\ny0 " << fmt_double(g.y0) << "\nz0 "
     << fmt_double(g.z0) << '\n';
  os << "kind " << kind << '\n';
  os << "end_header\n";
}

GroundGrid read_volume_header(Header& h, std::string* kind) {
  GroundGrid g;
  g.nx = to_int(h.take("nx"));
  g.ny = to_int(h.take("ny"));
  g.nz = to_int(h.take("nz"));
  g.dx = to_double(h.take("dx"));
  g.dy = to_double(h.take("dy"));
  g.dz = to_double(h.take("dz"));
  g.x0 = to_double(h.take("x0"));
  g.y0 = to_double(h.take("y0"));
  g.z0 = to_double(h.take("z0"));
  *kind = h.take("kind");
  h.expect_consumed("volume");
  g.validate();
  if (g.num_voxels() > (1ull << 31))
    throw IoError("volume: implausible dimensions");
  return g;
}

}  // namespace

void write_complex_volume(const std::filesystem::path& path,
                          const ComplexVolume& u) {
  std::ofstream os = open_out(path);
  write_volume_header(os, u.grid, "complex");
  for (const auto& z : u.v) {
    write_f32(os, z.real());
    write_f32(os, z.imag());
  }
  if (!os) throw IoError("write failed: " + path.string());
}

ComplexVolume read_complex_volume(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  Header h = read_header(is, "TOMOVOLUME");
  std::string kind;
  const GroundGrid g = read_volume_header(h, &kind);
  if (kind != "complex")
    throw IoError("volume: expected complex kind, got " + kind);
  ComplexVolume u(g);
  for (auto& z : u.v) {
    const float re = read_f32(is);
    const float im = read_f32(is);
    z = {re, im};
  }
  if (!is) throw IoError("volume: truncated body in " + path.string());
  return u;
}

void write_magnitude_volume(const std::filesystem::path& path,
                            const MagnitudeVolume& m) {
  std::ofstream os = open_out(path);
  write_volume_header(os, m.grid, "magnitude");
  for (double v : m.v) write_f32(os, v);
  if (!os) throw IoError("write failed: " + path.string());
}

MagnitudeVolume read_magnitude_volume(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  Header h = read_header(is, "TOMOVOLUME");
  std::string kind;
  const GroundGrid g = read_volume_header(h, &kind);
  if (kind != "magnitude")
    throw IoError("volume: expected magnitude kind, got " + kind);
  MagnitudeVolume m(g);
  for (double& v : m.v) v = read_f32(is);
  if (!is) throw IoError("volume: truncated body in " + path.string());
  return m;
}

void write_surface_csv(const std::filesystem::path& path,
                       const ElevationMap& map) {
  std::ofstream os = open_out(path);
  os << "# TOMOSURFACE 1\n";
  os << "# nx " << map.nx << " ny " << map.ny << " dx " << fmt_double(map.dx)
     << " dy " << fmt_double(map.dy) << " x0 " << fmt_double(map.x0) << " y0 "
     << fmt_double(map.y0) << '\n';
  os << "x,y,z,valid\n";
  for (int ix = 0; ix < map.nx; ++ix)
    for (int iy = 0; iy < map.ny; ++iy) {
      os << fmt_double(map.x0 + ix * map.dx) << ','
         << fmt_double(map.y0 + iy * map.dy) << ','
         << fmt_double(map.at(ix, iy)) << ','
         << static_cast<int>(map.valid[map.column_index(ix, iy)]) << '\n';
    }
  if (!os) throw IoError("write failed: " + path.string());
}

ElevationMap read_surface_csv(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line != "# TOMOSURFACE 1")
    throw IoError("not a surface CSV: " + path.string());
  if (!std::getline(is, line)) throw IoError("surface CSV: missing metadata");
  ElevationMap map;
  {
    std::istringstream meta(line);
    std::string hash_tag, key;
    meta >> hash_tag;
    if (hash_tag != "#") throw IoError("surface CSV: malformed metadata");
    while (meta >> key) {
      std::string value;
      if (!(meta >> value)) throw IoError("surface CSV: malformed metadata");
      if (key == "nx") map.nx = to_int(value);
      else if (key == "ny") map.ny = to_int(value);
      else if (key == "dx") map.dx = to_double(value);
      else if (key == "dy") map.dy = to_double(value);
      else if (key == "x0") map.x0 = to_double(value);
      else if (key == "y0") map.y0 = to_double(value);
      else throw IoError("surface CSV: unknown metadata key " + key);
    }
  }
  if (map.nx < 1 || map.ny < 1) throw IoError("surface CSV: bad dims");
  if (!std::getline(is, line) || line != "x,y,z,valid")
    throw IoError("surface CSV: missing column header");
  map.z.assign(static_cast<std::size_t>(map.nx) * map.ny, 0.0);
  map.valid.assign(map.z.size(), 1);
  for (std::size_t row = 0; row < map.z.size(); ++row) {
    if (!std::getline(is, line))
      throw IoError("surface CSV: truncated at row " + std::to_string(row));
    std::istringstream ss(line);
    std::string fx, fy, fz, fv;
    if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') ||
        !std::getline(ss, fz, ',') || !std::getline(ss, fv))
      throw IoError("surface CSV: malformed row '" + line + "'");
    map.z[row] = to_double(fz);
    map.valid[row] = static_cast<std::uint8_t>(to_int(fv) != 0);
  }
  return map;
}

void write_surface_pgm(const std::filesystem::path& path,
                       const ElevationMap& map) {
  double zmin = map.z[0], zmax = map.z[0];
  for (double z : map.z) {
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }
  const double span = zmax > zmin ? zmax - zmin : 1.0;
  std::ofstream os = open_out(path);
  os << "P5\n";
  os << "# z = zmin + pixel * (zmax - zmin) / 65535; zmin "
     << fmt_double(zmin) << " zmax " << fmt_double(zmax) << '\n';
  os << map.nx << ' ' << map.ny << "\n65535\n";
  for (int iy = 0; iy < map.ny; ++iy)
    for (int ix = 0; ix < map.nx; ++ix) {
      const double t = (map.at(ix, iy) - zmin) / span;
      const unsigned v =
          static_cast<unsigned>(std::lround(t * 65535.0));
      const unsigned char hi = static_cast<unsigned char>(v >> 8);
      const unsigned char lo = static_cast<unsigned char>(v & 0xff);
      os.put(static_cast<char>(hi));
      os.put(static_cast<char>(lo));
    }
  if (!os) throw IoError("write failed: " + path.string());
}

void write_surface_ply(const std::filesystem::path& path,
                       const ElevationMap& map) {
  double zmin = map.z[0], zmax = map.z[0];
  for (double z : map.z) {
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }
  const double span = zmax > zmin ? zmax - zmin : 1.0;
  std::ofstream os = open_out(path);
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << static_cast<std::size_t>(map.nx) * map.ny << '\n';
  os << "property float x\nproperty float y\nproperty float z\n";
  os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "end_header\n";
  for (int ix = 0; ix < map.nx; ++ix)
    for (int iy = 0; iy < map.ny; ++iy) {
      const double z = map.at(ix, iy);
      const double t = (z - zmin) / span;
      const int r = static_cast<int>(std::lround(t * 255.0));
      const int b = 255 - r;
      os << fmt_double(map.x0 + ix * map.dx) << ' '
         << fmt_double(map.y0 + iy * map.dy) << ' ' << fmt_double(z) << ' '
         << r << " 96 " << b << '\n';
    }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace tomo
