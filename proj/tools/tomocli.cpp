// Command-line front end: config-driven pipelines over the tomography
// library. Every command prints machine-parsable key=value summary lines and
// mirrors them into <out>/manifest.txt.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 unsupported feature,
// 5 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tomo/config.hpp"
#include "tomo/errors.hpp"
#include "tomo/estimators.hpp"
#include "tomo/evaluation.hpp"
#include "tomo/forward_model.hpp"
#include "tomo/io.hpp"
#include "tomo/redress.hpp"
#include "tomo/scene.hpp"
#include "tomo/segmentation.hpp"
#include "tomo/sparse.hpp"

namespace fs = std::filesystem;
using namespace tomo;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  bool trace = false;
  std::optional<std::uint64_t> seed;
  std::string method_override;
};

class Manifest {
 public:
  explicit Manifest(const fs::path& out_dir) : path_(out_dir / "manifest.txt") {}

  void add(const std::string& key, const std::string& value) {
    lines_.push_back(key + "=" + value);
    std::cout << lines_.back() << '\n';
  }
  void add(const std::string& key, double value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value;
    add(key, ss.str());
  }
  void add(const std::string& key, std::uint64_t value) {
    add(key, std::to_string(value));
  }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }

  ~Manifest() {
    std::ofstream os(path_);
    for (const auto& line : lines_) os << line << '\n';
  }

 private:
  fs::path path_;
  std::vector<std::string> lines_;
};

RunConfig load(const Options& opt) {
  RunConfig cfg = load_config(opt.config_path);
  if (opt.seed) cfg.io.seed = *opt.seed;
  return cfg;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: missing block '" + what + "'");
}

void require_input(const std::string& path, const std::string& key) {
  if (path.empty())
    throw ConfigError("config: io." + key + " is required for this command");
  if (!fs::exists(path))
    throw ConfigError("config: io." + key + " does not exist: " + path);
}

fs::path ensure_out(const Options& opt) {
  fs::path out(opt.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory: " + out.string());
  return out;
}

void write_trace_csv(const fs::path& path, const SolveInfo& info) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "iteration,objective,kkt_residual\n";
  for (std::size_t i = 0; i < info.objective_trace.size(); ++i) {
    os << i << ',';
    os.precision(17);
    os << info.objective_trace[i] << ',';
    if (i + 1 == info.objective_trace.size())
      os << info.kkt;  // certificate of the returned iterate
    os << '\n';
  }
}

int cmd_simulate(const Options& opt) {
  RunConfig cfg = load(opt);
  require(cfg.has_geometry, "geometry");
  require(cfg.has_ground_grid, "ground_grid");
  require(cfg.has_scene, "scene");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  cfg.scene.seed = cfg.io.seed;
  const RadarGrid rgrid = cfg.effective_radar_grid();
  const CellMap map(cfg.geometry, rgrid, cfg.ground_grid);
  const Scene scene = make_scene(cfg.scene, cfg.ground_grid);
  const SARStack stack =
      simulate_stack(scene.reflectivity, map, cfg.scene.noise_sigma,
                     cfg.io.seed);

  const fs::path stack_path = out / "stack.bin";
  const fs::path truth_path = out / "truth.csv";
  write_stack(stack_path, stack, geometry_hash(cfg.geometry));
  write_surface_csv(truth_path, scene.truth);

  manifest.add("seed", cfg.io.seed);
  manifest.add("sigma", cfg.scene.noise_sigma);
  manifest.add("stack_path", stack_path.string());
  manifest.add("stack_hash", hex64(fnv1a64_file(stack_path)));
  manifest.add("truth_path", truth_path.string());
  manifest.add("truth_hash", hex64(fnv1a64_file(truth_path)));
  return 0;
}

int cmd_invert(const Options& opt) {
  RunConfig cfg = load(opt);
  require(cfg.has_geometry, "geometry");
  require(cfg.has_ground_grid, "ground_grid");
  require(cfg.has_estimator, "estimator");
  require_input(cfg.io.stack_path, "stack_path");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  std::string method =
      opt.method_override.empty() ? cfg.estimator.method : opt.method_override;
  if (method == "wsf" || method == "spice" || method == "nsf")
    throw UnsupportedError("method '" + method +
                           "' is out of scope (criterion not implemented)");

  std::string stored_hash;
  const SARStack stack = read_stack(cfg.io.stack_path, &stored_hash);
  if (stored_hash != geometry_hash(cfg.geometry))
    throw ConfigError("stack geometry hash does not match the config");
  RadarGrid rgrid = stack.rgrid;
  const CellMap map(cfg.geometry, rgrid, cfg.ground_grid);

  MagnitudeVolume mag;
  SolveInfo info;
  bool has_info = false;
  if (method == "beamforming" || method == "capon" || method == "music") {
    const SpectralMethod m = method == "beamforming"
                                 ? SpectralMethod::kBeamforming
                                 : (method == "capon" ? SpectralMethod::kCapon
                                                      : SpectralMethod::kMusic);
    mag = spectral_volume(stack, map, m, cfg.estimator.spectral);
  } else if (method == "cs" || method == "l1-3d") {
    ComplexVolume u;
    if (method == "cs") {
      u = invert_cs_per_cell(stack, map, cfg.estimator.mu, cfg.estimator.solver,
                             &info);
    } else {
      u = invert_l1_3d(stack, map, SparsityMap::Uniform(cfg.estimator.mu),
                       cfg.estimator.solver, &info);
    }
    has_info = true;
    mag = magnitudes(u);
    const fs::path cpath = out / "volume_complex.bin";
    write_complex_volume(cpath, u);
    manifest.add("complex_volume_path", cpath.string());
    manifest.add("complex_volume_hash", hex64(fnv1a64_file(cpath)));
  } else {
    throw UnsupportedError("unsupported method '" + method + "'");
  }

  const fs::path vpath = out / "volume.bin";
  write_magnitude_volume(vpath, mag);
  manifest.add("method", method);
  manifest.add("volume_path", vpath.string());
  manifest.add("volume_hash", hex64(fnv1a64_file(vpath)));
  if (has_info) {
    manifest.add("iterations", info.iterations);
    manifest.add("objective", info.objective);
    manifest.add("kkt_residual", info.kkt);
    if (opt.trace) {
      write_trace_csv(out / "trace.csv", info);
      manifest.add("trace_path", (out / "trace.csv").string());
    }
  }
  return 0;
}

int cmd_segment(const Options& opt) {
  RunConfig cfg = load(opt);
  require(cfg.has_geometry, "geometry");
  require(cfg.has_segmentation, "segmentation");
  require_input(cfg.io.volume_path, "volume_path");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  const MagnitudeVolume volume = read_magnitude_volume(cfg.io.volume_path);
  ElevationMap map =
      segment_surface(volume, cfg.geometry, cfg.segmentation.beta);
  const double energy =
      surface_energy(map, volume, cfg.geometry, cfg.segmentation.beta);
  if (cfg.segmentation.shadow_processing)
    apply_shadow_mask(map, volume, cfg.geometry, cfg.segmentation.tau_shadow);

  const fs::path spath = out / "surface.csv";
  write_surface_csv(spath, map);
  std::size_t masked = 0;
  for (auto v : map.valid) masked += v == 0;
  manifest.add("beta", cfg.segmentation.beta);
  manifest.add("energy", energy);
  manifest.add("masked_fraction",
               static_cast<double>(masked) / static_cast<double>(map.z.size()));
  manifest.add("surface_path", spath.string());
  manifest.add("surface_hash", hex64(fnv1a64_file(spath)));
  return 0;
}

int cmd_redress(const Options& opt) {
  RunConfig cfg = load(opt);
  require(cfg.has_geometry, "geometry");
  require(cfg.has_ground_grid, "ground_grid");
  require(cfg.has_redress, "redress");
  require(cfg.has_segmentation, "segmentation");
  require_input(cfg.io.stack_path, "stack_path");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  std::string stored_hash;
  const SARStack stack = read_stack(cfg.io.stack_path, &stored_hash);
  if (stored_hash != geometry_hash(cfg.geometry))
    throw ConfigError("stack geometry hash does not match the config");
  const CellMap map(cfg.geometry, stack.rgrid, cfg.ground_grid);

  RedressParams params;
  params.iterations = cfg.redress.iterations;
  params.mu0 = cfg.redress.mu0;
  params.b = cfg.redress.b;
  params.beta = cfg.segmentation.beta;
  params.tau_shadow = cfg.segmentation.tau_shadow;
  params.warm_start = cfg.redress.warm_start;
  params.solver = cfg.estimator.solver;  // defaults when block absent
  params.checkpoint_dir = out;

  RedressResult result = redress(stack, map, params);
  if (cfg.segmentation.shadow_processing)
    apply_shadow_mask(result.surface, magnitudes(result.reflectivity),
                      cfg.geometry, params.tau_shadow);

  const fs::path vpath = out / "volume.bin";
  const fs::path cpath = out / "volume_complex.bin";
  const fs::path spath = out / "surface.csv";
  write_magnitude_volume(vpath, magnitudes(result.reflectivity));
  write_complex_volume(cpath, result.reflectivity);
  write_surface_csv(spath, result.surface);

  nlohmann::json run;
  run["iterations"] = params.iterations;
  run["mu0"] = params.mu0;
  run["b"] = params.b;
  run["beta"] = params.beta;
  run["warm_start"] = params.warm_start;
  run["seed"] = cfg.io.seed;
  run["per_iteration"] = nlohmann::json::array();
  for (const auto& it : result.iterations) {
    nlohmann::json ji;
    ji["mu_mean"] = it.mu_mean;
    ji["objective"] = it.objective;
    ji["kkt"] = it.kkt;
    ji["solver_iterations"] = it.solver_iterations;
    ji["surface_energy"] = it.surface_energy;
    ji["support_size"] = it.support_size;
    ji["off_surface_support"] = it.off_surface_support;
    run["per_iteration"].push_back(ji);
  }
  std::ofstream((out / "manifest.json")) << run.dump(2) << '\n';

  for (std::size_t k = 0; k < result.iterations.size(); ++k) {
    manifest.add("iter" + std::to_string(k) + "_energy",
                 result.iterations[k].surface_energy);
    manifest.add("iter" + std::to_string(k) + "_off_surface_support",
                 static_cast<std::uint64_t>(
                     result.iterations[k].off_surface_support));
  }
  manifest.add("volume_path", vpath.string());
  manifest.add("volume_hash", hex64(fnv1a64_file(vpath)));
  manifest.add("complex_volume_path", cpath.string());
  manifest.add("complex_volume_hash", hex64(fnv1a64_file(cpath)));
  manifest.add("surface_path", spath.string());
  manifest.add("surface_hash", hex64(fnv1a64_file(spath)));
  return 0;
}

int cmd_eval(const Options& opt) {
  RunConfig cfg = load(opt);
  require_input(cfg.io.est_path, "est_path");
  require_input(cfg.io.truth_path, "truth_path");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  const ElevationMap est = read_surface_csv(cfg.io.est_path);
  const ElevationMap truth = read_surface_csv(cfg.io.truth_path);
  const SurfaceErrorReport report = mean_error(est, truth);

  const fs::path rpath = out / "report.csv";
  {
    std::ofstream os(rpath);
    if (!os) throw IoError("cannot write " + rpath.string());
    os << "ix,iy,abs_error_m,used\n";
    for (int ix = 0; ix < est.nx; ++ix)
      for (int iy = 0; iy < est.ny; ++iy) {
        const std::size_t i = est.column_index(ix, iy);
        os << ix << ',' << iy << ',';
        os.precision(17);
        os << report.per_column_error[i] << ','
           << ((est.valid[i] && truth.valid[i]) ? 1 : 0) << '\n';
      }
  }
  {
    // One summary row per evaluation: estimator, mean error, beta.
    std::ofstream os(out / "summary.txt");
    os << "estimator\tmean_error_m\tbeta\n";
    os.precision(6);
    os << (cfg.has_estimator ? cfg.estimator.method : "unknown") << '\t'
       << report.mean_abs_error << '\t'
       << (cfg.has_segmentation ? cfg.segmentation.beta : 0.0) << '\n';
  }
  manifest.add("mean_error_m", report.mean_abs_error);
  manifest.add("masked_fraction", report.masked_fraction);
  manifest.add("valid_columns", report.valid_columns);
  manifest.add("report_path", rpath.string());
  return 0;
}

int cmd_export(const Options& opt) {
  RunConfig cfg = load(opt);
  require_input(cfg.io.est_path, "est_path");
  const fs::path out = ensure_out(opt);
  Manifest manifest(out);

  const ElevationMap map = read_surface_csv(cfg.io.est_path);
  const fs::path ply = out / "surface.ply";
  const fs::path pgm = out / "surface.pgm";
  const fs::path csv = out / "surface.csv";
  write_surface_ply(ply, map);
  write_surface_pgm(pgm, map);
  write_surface_csv(csv, map);
  manifest.add("ply_path", ply.string());
  manifest.add("ply_hash", hex64(fnv1a64_file(ply)));
  manifest.add("pgm_path", pgm.string());
  manifest.add("pgm_hash", hex64(fnv1a64_file(pgm)));
  manifest.add("csv_path", csv.string());
  manifest.add("csv_hash", hex64(fnv1a64_file(csv)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAR tomography toolkit: simulate, invert, segment, redress"};
  app.require_subcommand(1);

  Options opt;
  const auto add_common = [&](CLI::App* sub, bool with_method = false) {
    sub->add_option("--config", opt.config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--trace", opt.trace, "write solver diagnostics CSV");
    sub->add_option("--seed", opt.seed, "override the config seed");
    if (with_method)
      sub->add_option("--method", opt.method_override,
                      "override estimator.method");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize a stack");
  CLI::App* invert = app.add_subcommand("invert", "tomographic inversion");
  CLI::App* segment = app.add_subcommand("segment", "graph-cut surface");
  CLI::App* redress_cmd =
      app.add_subcommand("redress", "alternating inversion + segmentation");
  CLI::App* eval = app.add_subcommand("eval", "score a surface against truth");
  CLI::App* exprt = app.add_subcommand("export", "surface to PLY/PGM/CSV");
  add_common(simulate);
  add_common(invert, true);
  add_common(segment);
  add_common(redress_cmd);
  add_common(eval);
  add_common(exprt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (invert->parsed()) return cmd_invert(opt);
    if (segment->parsed()) return cmd_segment(opt);
    if (redress_cmd->parsed()) return cmd_redress(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (exprt->parsed()) return cmd_export(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
