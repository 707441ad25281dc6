#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "tomo/forward_model.hpp"
#include "tomo/geometry.hpp"
#include "tomo/io.hpp"
#include "tomo/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_cli;
fs::path g_root;

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json base_config() {
  json j;
  j["geometry"]["n_images"] = 8;
  std::vector<double> baselines{0};
  for (int n = 1; n < 8; ++n) baselines.push_back(-600.0 + 1200.0 * (n - 1) / 6.0);
  j["geometry"]["baselines"] = baselines;
  j["geometry"]["wavelength"] = 0.031;
  j["geometry"]["incidence_rad"] = 0.6;
  j["geometry"]["reference_range"] = 6e5;
  j["ground_grid"] = {{"nx", 8},  {"ny", 10}, {"nz", 6}, {"dx", 1.0},
                      {"dy", 1.0}, {"dz", 1.0}, {"x0", 0.0}, {"y0", 0.0},
                      {"z0", 0.0}};
  j["scene"]["boxes"] = json::array(
      {{{"x_min", 1.0}, {"x_max", 5.0}, {"y_min", 3.0}, {"y_max", 7.0},
        {"height", 3.0}}});
  j["scene"]["facade_amplitude"] = 2.0;
  j["scene"]["noise_sigma"] = 0.0;
  j["estimator"]["method"] = "beamforming";
  j["estimator"]["window_size"] = 5;
  j["segmentation"]["beta"] = 0.5;
  j["io"]["seed"] = 11;
  return j;
}

fs::path write_config(const json& j, const std::string& name) {
  const fs::path p = g_root / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string manifest_value(const fs::path& out_dir, const std::string& key) {
  std::ifstream is(out_dir / "manifest.txt");
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

}  // namespace

TEST_CASE("simulate: deterministic outputs, noiseless equals the operator") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "sim.json");
  const fs::path out1 = g_root / "sim1";
  const fs::path out2 = g_root / "sim2";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  out1.string()) == 0);
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  out2.string()) == 0);
  CHECK(manifest_value(out1, "stack_hash") == manifest_value(out2, "stack_hash"));
  CHECK(manifest_value(out1, "truth_hash") == manifest_value(out2, "truth_hash"));
  CHECK(!manifest_value(out1, "stack_hash").empty());

  // sigma = 0: the file holds apply_phi(u) quantized to float32.
  using namespace tomo;
  AcquisitionGeometry g;
  g.num_images = 8;
  g.baselines = {0};
  for (int n = 1; n < 8; ++n)
    g.baselines.push_back(-600.0 + 1200.0 * (n - 1) / 6.0);
  g.wavelength = 0.031;
  g.incidence = 0.6;
  g.reference_range = 6e5;
  GroundGrid grid;
  grid.nx = 8;
  grid.ny = 10;
  grid.nz = 6;
  grid.dx = grid.dy = grid.dz = 1.0;
  grid.x0 = grid.y0 = grid.z0 = 0.0;

  const SARStack loaded = read_stack(out1 / "stack.bin");
  const CellMap map(g, loaded.rgrid, grid);
  SceneSpec spec;
  spec.boxes.push_back({1.0, 5.0, 3.0, 7.0, 3.0});
  spec.facade_amplitude = 2.0;
  spec.seed = 11;
  const Scene scene = make_scene(spec, grid);
  const SARStack clean = apply_phi(scene.reflectivity, map);
  REQUIRE(clean.v.size() == loaded.v.size());
  for (std::size_t i = 0; i < clean.v.size(); ++i) {
    CHECK(static_cast<float>(clean.v[i].real()) ==
          static_cast<float>(loaded.v[i].real()));
    CHECK(static_cast<float>(clean.v[i].imag()) ==
          static_cast<float>(loaded.v[i].imag()));
  }
}

TEST_CASE("config errors exit with code 2 and unsupported methods with 4") {
  json cfg = base_config();
  cfg.erase("scene");
  const fs::path no_scene = write_config(cfg, "noscene.json");
  CHECK(run_cli("simulate --config " + no_scene.string() + " --out " +
                (g_root / "e1").string()) == 2);

  json unknown = base_config();
  unknown["scene"]["specularity"] = 1.0;  // not a key
  const fs::path bad_key = write_config(unknown, "badkey.json");
  CHECK(run_cli("simulate --config " + bad_key.string() + " --out " +
                (g_root / "e2").string()) == 2);

  CHECK(run_cli("simulate --config " + (g_root / "missing.json").string() +
                " --out " + (g_root / "e3").string()) == 2);

  // Prepare a stack for invert.
  json sim = base_config();
  const fs::path cpath = write_config(sim, "sim4.json");
  const fs::path simout = g_root / "sim4";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  simout.string()) == 0);
  json inv = base_config();
  inv["io"]["stack_path"] = (simout / "stack.bin").string();
  inv["io"]["seed"] = 11;
  inv["estimator"]["method"] = "wsf";
  const fs::path wsf = write_config(inv, "wsf.json");
  CHECK(run_cli("invert --config " + wsf.string() + " --out " +
                (g_root / "e4").string()) == 4);
  inv["estimator"]["method"] = "warp-drive";
  const fs::path strange = write_config(inv, "strange.json");
  CHECK(run_cli("invert --config " + strange.string() + " --out " +
                (g_root / "e5").string()) == 4);
  // Missing input file is a config error.
  inv["estimator"]["method"] = "beamforming";
  inv["io"]["stack_path"] = (g_root / "absent.bin").string();
  const fs::path absent = write_config(inv, "absent.json");
  CHECK(run_cli("invert --config " + absent.string() + " --out " +
                (g_root / "e6").string()) == 2);
}

TEST_CASE("numerical failures exit with code 5") {
  // Noiseless single-facade scene: the local covariances are rank one, so
  // Capon without diagonal loading cannot factor them.
  json cfg = base_config();
  cfg["scene"]["boxes"] = json::array(
      {{{"x_min", 2.0}, {"x_max", 2.0}, {"y_min", 3.0}, {"y_max", 3.0},
        {"height", 2.0}}});
  cfg["scene"]["ground_amplitude"] = 0.0;
  cfg["scene"]["roof_amplitude"] = 0.0;
  cfg["scene"]["facade_amplitude"] = 1.0;
  const fs::path cpath = write_config(cfg, "num.json");
  const fs::path sim = g_root / "num_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);

  json inv = cfg;
  inv["io"]["stack_path"] = (sim / "stack.bin").string();
  inv["estimator"]["method"] = "capon";
  inv["estimator"]["capon_loading"] = 0.0;
  const fs::path ipath = write_config(inv, "num_inv.json");
  CHECK(run_cli("invert --config " + ipath.string() + " --out " +
                (g_root / "num_out").string()) == 5);
}

TEST_CASE("full pipeline: invert, segment, eval, export") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "pipe.json");
  const fs::path sim = g_root / "p_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);

  json inv = base_config();
  inv["io"]["stack_path"] = (sim / "stack.bin").string();
  const fs::path inv_cfg = write_config(inv, "pipe_inv.json");
  const fs::path invout = g_root / "p_inv";
  REQUIRE(run_cli("invert --config " + inv_cfg.string() + " --out " +
                  invout.string()) == 0);
  CHECK(fs::exists(invout / "volume.bin"));

  json seg = base_config();
  seg["io"]["volume_path"] = (invout / "volume.bin").string();
  const fs::path seg_cfg = write_config(seg, "pipe_seg.json");
  const fs::path segout = g_root / "p_seg";
  REQUIRE(run_cli("segment --config " + seg_cfg.string() + " --out " +
                  segout.string()) == 0);
  CHECK(fs::exists(segout / "surface.csv"));

  // est = truth gives a zero mean error.
  json ev = base_config();
  ev["io"]["est_path"] = (sim / "truth.csv").string();
  ev["io"]["truth_path"] = (sim / "truth.csv").string();
  const fs::path ev_cfg = write_config(ev, "pipe_eval.json");
  const fs::path evout = g_root / "p_eval";
  REQUIRE(run_cli("eval --config " + ev_cfg.string() + " --out " +
                  evout.string()) == 0);
  CHECK(manifest_value(evout, "mean_error_m") == "0");

  // Real estimate against truth: report written, error finite.
  json ev2 = base_config();
  ev2["io"]["est_path"] = (segout / "surface.csv").string();
  ev2["io"]["truth_path"] = (sim / "truth.csv").string();
  const fs::path ev2_cfg = write_config(ev2, "pipe_eval2.json");
  const fs::path ev2out = g_root / "p_eval2";
  REQUIRE(run_cli("eval --config " + ev2_cfg.string() + " --out " +
                  ev2out.string()) == 0);
  CHECK(fs::exists(ev2out / "report.csv"));
  CHECK(fs::exists(ev2out / "summary.txt"));

  json ex = base_config();
  ex["io"]["est_path"] = (segout / "surface.csv").string();
  const fs::path ex_cfg = write_config(ex, "pipe_export.json");
  const fs::path exout = g_root / "p_export";
  REQUIRE(run_cli("export --config " + ex_cfg.string() + " --out " +
                  exout.string()) == 0);
  CHECK(fs::exists(exout / "surface.ply"));
  CHECK(fs::exists(exout / "surface.pgm"));
  CHECK(fs::exists(exout / "surface.csv"));
}

TEST_CASE("l1-3d inversion with --trace writes a monotone objective CSV") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "l1.json");
  const fs::path sim = g_root / "l1_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);

  json inv = base_config();
  inv["io"]["stack_path"] = (sim / "stack.bin").string();
  inv["estimator"]["method"] = "l1-3d";
  inv["estimator"]["mu"] = 0.3;
  inv["estimator"]["solver"] = {{"max_iterations", 300},
                                {"tolerance", 1e-9},
                                {"accelerated", false}};
  const fs::path inv_cfg = write_config(inv, "l1_inv.json");
  const fs::path invout = g_root / "l1_out";
  REQUIRE(run_cli("invert --config " + inv_cfg.string() + " --out " +
                  invout.string() + " --trace") == 0);
  CHECK(fs::exists(invout / "volume_complex.bin"));

  std::ifstream trace(invout / "trace.csv");
  REQUIRE(trace.good());
  std::string header;
  std::getline(trace, header);
  CHECK(header == "iteration,objective,kkt_residual");
  double prev = 1e300;
  int rows = 0;
  std::string line;
  while (std::getline(trace, line)) {
    std::istringstream ss(line);
    std::string it, obj;
    std::getline(ss, it, ',');
    std::getline(ss, obj, ',');
    const double f = std::stod(obj);
    CHECK(f <= prev + 1e-9);
    prev = f;
    ++rows;
  }
  CHECK(rows > 3);
}

TEST_CASE("seed flag overrides the config seed") {
  json cfg = base_config();
  cfg["scene"]["noise_sigma"] = 0.3;
  const fs::path cpath = write_config(cfg, "seed.json");
  const fs::path a = g_root / "seed_a";
  const fs::path b = g_root / "seed_b";
  const fs::path c = g_root / "seed_c";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  a.string()) == 0);
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  b.string() + " --seed 99") == 0);
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  c.string() + " --seed 99") == 0);
  CHECK(manifest_value(a, "stack_hash") != manifest_value(b, "stack_hash"));
  CHECK(manifest_value(b, "stack_hash") == manifest_value(c, "stack_hash"));
}

TEST_CASE("geometry hash mismatch between stack and config exits 2") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "hash.json");
  const fs::path sim = g_root / "hash_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);
  json other = base_config();
  other["geometry"]["incidence_rad"] = 0.7;  // different acquisition
  other["io"]["stack_path"] = (sim / "stack.bin").string();
  const fs::path opath = write_config(other, "hash_other.json");
  CHECK(run_cli("invert --config " + opath.string() + " --out " +
                (g_root / "hash_out").string()) == 2);
}

TEST_CASE("per-cell cs inversion runs and writes both volumes") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "cs.json");
  const fs::path sim = g_root / "cs_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);
  json inv = base_config();
  inv["io"]["stack_path"] = (sim / "stack.bin").string();
  inv["estimator"]["method"] = "cs";
  inv["estimator"]["mu"] = 0.5;
  const fs::path ipath = write_config(inv, "cs_inv.json");
  const fs::path out = g_root / "cs_out";
  REQUIRE(run_cli("invert --config " + ipath.string() + " --out " +
                  out.string()) == 0);
  CHECK(fs::exists(out / "volume.bin"));
  CHECK(fs::exists(out / "volume_complex.bin"));
}

TEST_CASE("redress command: checkpoints, manifest, final outputs") {
  json cfg = base_config();
  const fs::path cpath = write_config(cfg, "rd.json");
  const fs::path sim = g_root / "rd_sim";
  REQUIRE(run_cli("simulate --config " + cpath.string() + " --out " +
                  sim.string()) == 0);

  json rd = base_config();
  rd["io"]["stack_path"] = (sim / "stack.bin").string();
  rd["redress"] = {{"iterations", 2}, {"mu0", 0.5}, {"b", 4.0}};
  rd["estimator"]["solver"] = {{"max_iterations", 300}, {"tolerance", 1e-8}};
  const fs::path rd_cfg = write_config(rd, "rd_run.json");
  const fs::path out = g_root / "rd_out";
  REQUIRE(run_cli("redress --config " + rd_cfg.string() + " --out " +
                  out.string()) == 0);

  for (int k = 0; k < 2; ++k) {
    const fs::path iter = out / ("iter_" + std::to_string(k));
    CHECK(fs::exists(iter / "volume.bin"));
    CHECK(fs::exists(iter / "surface.csv"));
    CHECK(fs::exists(iter / "mu.bin"));
  }
  CHECK(fs::exists(out / "volume.bin"));
  CHECK(fs::exists(out / "volume_complex.bin"));
  CHECK(fs::exists(out / "surface.csv"));

  std::ifstream ms(out / "manifest.json");
  REQUIRE(ms.good());
  json manifest;
  ms >> manifest;
  CHECK(manifest["iterations"] == 2);
  CHECK(manifest["per_iteration"].size() == 2);
  CHECK(manifest["per_iteration"][0].contains("surface_energy"));
  CHECK(manifest["per_iteration"][0].contains("kkt"));

  // The mu checkpoint of round 1 is a readable magnitude volume with
  // values >= mu0.
  const tomo::MagnitudeVolume mu =
      tomo::read_magnitude_volume(out / "iter_1" / "mu.bin");
  for (double v : mu.v) CHECK(v >= 0.5 - 1e-6);
}

int main(int argc, char** argv) {
  doctest::Context context;
  // Last argument: path to the CLI binary under test.
  if (argc > 1) {
    g_cli = argv[argc - 1];
    --argc;
  }
  context.applyCommandLine(argc, argv);
  g_root = fs::temp_directory_path() /
           ("tomo_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(g_root);
  const int res = context.run();
  fs::remove_all(g_root);
  return res;
}
