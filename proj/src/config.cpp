#include "tomo/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "tomo/errors.hpp"

namespace tomo {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + context);
}

double get_num(const json& j, const char* key, double fallback,
               bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string("config: missing key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_number())
    throw ConfigError(std::string("config: key '") + key + "' must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const char* key, int fallback,
            bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string("config: missing key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_number_integer())
    throw ConfigError(std::string("config: key '") + key + "' must be an integer");
  return j[key].get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean())
    throw ConfigError(std::string("config: key '") + key + "' must be a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback,
                    bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string("config: missing key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_string())
    throw ConfigError(std::string("config: key '") + key + "' must be a string");
  return j[key].get<std::string>();
}

AcquisitionGeometry parse_geometry(const json& j) {
  check_keys(j, {"n_images", "baselines", "wavelength", "incidence_rad",
                 "reference_range"},
             "geometry");
  AcquisitionGeometry g;
  g.num_images = get_int(j, "n_images", 0, true);
  if (!j.contains("baselines") || !j["baselines"].is_array())
    throw ConfigError("config: geometry.baselines must be an array");
  for (const auto& b : j["baselines"]) {
    if (!b.is_number()) throw ConfigError("config: baselines must be numbers");
    g.baselines.push_back(b.get<double>());
  }
  g.wavelength = get_num(j, "wavelength", 0.0, true);
  g.incidence = get_num(j, "incidence_rad", 0.0, true);
  g.reference_range = get_num(j, "reference_range", 0.0, true);
  g.validate();
  return g;
}

GroundGrid parse_ground_grid(const json& j) {
  check_keys(j, {"nx", "ny", "nz", "dx", "dy", "dz", "x0", "y0", "z0"},
             "ground_grid");
  GroundGrid g;
  g.nx = get_int(j, "nx", 0, true);
  g.ny = get_int(j, "ny", 0, true);
  g.nz = get_int(j, "nz", 0, true);
  g.dx = get_num(j, "dx", 0.0, true);
  g.dy = get_num(j, "dy", 0.0, true);
  g.dz = get_num(j, "dz", 0.0, true);
  g.x0 = get_num(j, "x0", 0.0);
  g.y0 = get_num(j, "y0", 0.0);
  g.z0 = get_num(j, "z0", 0.0);
  g.validate();
  return g;
}

RadarGrid parse_radar_grid(const json& j) {
  check_keys(j, {"azimuth_count", "range_count", "d_azimuth", "d_range",
                 "azimuth_origin", "range_origin"},
             "radar_grid");
  RadarGrid g;
  g.azimuth_count = get_int(j, "azimuth_count", 0, true);
  g.range_count = get_int(j, "range_count", 0, true);
  g.d_azimuth = get_num(j, "d_azimuth", 0.0, true);
  g.d_range = get_num(j, "d_range", 0.0, true);
  g.azimuth_origin = get_num(j, "azimuth_origin", 0.0);
  g.range_origin = get_num(j, "range_origin", 0.0, true);
  g.validate();
  return g;
}

SceneSpec parse_scene(const json& j) {
  check_keys(j, {"boxes", "ground_amplitude", "facade_amplitude",
                 "roof_amplitude", "scatterer_density", "noise_sigma"},
             "scene");
  SceneSpec s;
  if (j.contains("boxes")) {
    if (!j["boxes"].is_array())
      throw ConfigError("config: scene.boxes must be an array");
    for (const auto& jb : j["boxes"]) {
      check_keys(jb, {"x_min", "x_max", "y_min", "y_max", "height"},
                 "scene.boxes[]");
      Box b;
      b.x_min = get_num(jb, "x_min", 0.0, true);
      b.x_max = get_num(jb, "x_max", 0.0, true);
      b.y_min = get_num(jb, "y_min", 0.0, true);
      b.y_max = get_num(jb, "y_max", 0.0, true);
      b.height = get_num(jb, "height", 0.0, true);
      s.boxes.push_back(b);
    }
  }
  s.ground_amplitude = get_num(j, "ground_amplitude", 1.0);
  s.facade_amplitude = get_num(j, "facade_amplitude", 1.0);
  s.roof_amplitude = get_num(j, "roof_amplitude", 1.0);
  s.scatterer_density = get_num(j, "scatterer_density", 1e9);
  s.noise_sigma = get_num(j, "noise_sigma", 0.0);
  return s;
}

SolverParams parse_solver(const json& j) {
  check_keys(j, {"max_iterations", "tolerance", "accelerated", "step_safety",
                 "kkt_target_factor"},
             "estimator.solver");
  SolverParams p;
  p.max_iterations = get_int(j, "max_iterations", p.max_iterations);
  p.tolerance = get_num(j, "tolerance", p.tolerance);
  p.accelerated = get_bool(j, "accelerated", p.accelerated);
  p.step_safety = get_num(j, "step_safety", p.step_safety);
  p.kkt_target_factor = get_num(j, "kkt_target_factor", p.kkt_target_factor);
  p.validate();
  return p;
}

EstimatorConfig parse_estimator(const json& j) {
  check_keys(j, {"method", "window_size", "window_std", "capon_loading",
                 "music_order", "mu", "solver"},
             "estimator");
  EstimatorConfig e;
  e.method = get_str(j, "method", "", true);
  e.spectral.window_size = get_int(j, "window_size", e.spectral.window_size);
  e.spectral.window_std = get_num(j, "window_std", e.spectral.window_std);
  e.spectral.capon_loading =
      get_num(j, "capon_loading", e.spectral.capon_loading);
  e.spectral.music_order = get_int(j, "music_order", e.spectral.music_order);
  e.mu = get_num(j, "mu", e.mu);
  if (j.contains("solver")) e.solver = parse_solver(j["solver"]);
  return e;
}

SegmentationConfig parse_segmentation(const json& j) {
  check_keys(j, {"beta", "tau_shadow", "shadow_processing"}, "segmentation");
  SegmentationConfig s;
  s.beta = get_num(j, "beta", s.beta);
  s.tau_shadow = get_num(j, "tau_shadow", s.tau_shadow);
  s.shadow_processing = get_bool(j, "shadow_processing", s.shadow_processing);
  if (s.beta < 0) throw ConfigError("config: segmentation.beta must be >= 0");
  return s;
}

RedressConfig parse_redress(const json& j) {
  check_keys(j, {"iterations", "mu0", "b", "warm_start"}, "redress");
  RedressConfig r;
  r.iterations = get_int(j, "iterations", r.iterations);
  r.mu0 = get_num(j, "mu0", r.mu0);
  r.b = get_num(j, "b", r.b);
  r.warm_start = get_bool(j, "warm_start", r.warm_start);
  return r;
}

IoPaths parse_io(const json& j) {
  check_keys(j, {"stack_path", "volume_path", "truth_path", "est_path", "seed"},
             "io");
  IoPaths io;
  io.stack_path = get_str(j, "stack_path", "");
  io.volume_path = get_str(j, "volume_path", "");
  io.truth_path = get_str(j, "truth_path", "");
  io.est_path = get_str(j, "est_path", "");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw ConfigError("config: io.seed must be an integer");
    io.seed = j["seed"].get<std::uint64_t>();
  }
  return io;
}

}  // namespace

RadarGrid derive_radar_grid(const AcquisitionGeometry& geom,
                            const GroundGrid& grid) {
  RadarGrid rg;
  rg.azimuth_count = grid.nx;
  rg.d_azimuth = grid.dx;
  rg.azimuth_origin = grid.x0;
  rg.d_range = std::min(grid.dy, grid.dz);
  double r_min = 0.0, r_max = 0.0;
  bool first = true;
  for (double y : {grid.y0, grid.y(grid.ny - 1)})
    for (double z : {grid.z0, grid.z(grid.nz - 1)}) {
      const double rho = geom.slant_range(y, z);
      if (first) {
        r_min = r_max = rho;
        first = false;
      } else {
        r_min = std::min(r_min, rho);
        r_max = std::max(r_max, rho);
      }
    }
  rg.range_origin = r_min;
  rg.range_count =
      static_cast<int>(std::ceil((r_max - r_min) / rg.d_range - 1e-9)) + 1;
  return rg;
}

RadarGrid RunConfig::effective_radar_grid() const {
  if (has_radar_grid) return radar_grid;
  if (!has_geometry || !has_ground_grid)
    throw ConfigError(
        "config: radar_grid needs geometry and ground_grid to be derived");
  return derive_radar_grid(geometry, ground_grid);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j,
             {"geometry", "ground_grid", "radar_grid", "scene", "estimator",
              "segmentation", "redress", "io"},
             "top level");

  RunConfig cfg;
  if (j.contains("geometry")) {
    cfg.geometry = parse_geometry(j["geometry"]);
    cfg.has_geometry = true;
  }
  if (j.contains("ground_grid")) {
    cfg.ground_grid = parse_ground_grid(j["ground_grid"]);
    cfg.has_ground_grid = true;
  }
  if (j.contains("radar_grid")) {
    cfg.radar_grid = parse_radar_grid(j["radar_grid"]);
    cfg.has_radar_grid = true;
  }
  if (j.contains("scene")) {
    cfg.scene = parse_scene(j["scene"]);
    cfg.has_scene = true;
  }
  if (j.contains("estimator")) {
    cfg.estimator = parse_estimator(j["estimator"]);
    cfg.has_estimator = true;
  }
  if (j.contains("segmentation")) {
    cfg.segmentation = parse_segmentation(j["segmentation"]);
    cfg.has_segmentation = true;
  }
  if (j.contains("redress")) {
    cfg.redress = parse_redress(j["redress"]);
    cfg.has_redress = true;
  }
  if (j.contains("io")) cfg.io = parse_io(j["io"]);
  return cfg;
}

}  // namespace tomo
