// End-to-end checks of the command-line tool. The binary path comes in via
// the SVANN_CLI_PATH compile definition; commands run through std::system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "svann/raster_io.hpp"

using namespace svann;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SVANN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "svann_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_two_zone_config(const fs::path& path) {
  std::ofstream f(path);
  f << R"({
  "scene": {"synthetic": {
    "width": 48, "height": 48,
    "zones": [
      {"id": "A", "rect": [0, 0, 24, 48], "rule": "ndvi_default", "noise": 0.0},
      {"id": "B", "rect": [24, 0, 48, 48], "rule": "ndwi_default", "noise": 0.0}
    ]}},
  "preprocess": {"tile_size": 8, "fractions": [0.8, 0.1, 0.1]},
  "models": {"mode": "svann-i", "indices": ["NDVI", "NDWI"], "hidden": [6],
             "train": {"learning_rate": 2.0, "epochs": 6, "batch_size": 64},
             "max_pixels": 600}
})";
}

}  // namespace

TEST_CASE("help exits 0 for every subcommand") {
  CHECK(run("--help") == 0);
  for (const char* sub : {"synth", "preprocess", "index", "rules", "train", "evaluate",
                          "compare", "experiment", "pinn", "ad"})
    CHECK(run(std::string(sub) + " --help") == 0);
  CHECK(run("pinn paper-trace --help") == 0);
  CHECK(run("experiment upsampling --help") == 0);
}

TEST_CASE("usage errors exit 1, data errors exit 2") {
  CHECK(run("no-such-subcommand") == 1);
  CHECK(run("") == 1);
  CHECK(run("synth") == 1);  // missing required --config
  CHECK(run("synth --config /nonexistent/config.json --out /tmp/x") == 2);
  CHECK(run("index --input /nonexistent.svr --out /tmp/x.svr") == 2);
}

TEST_CASE("synth is byte-deterministic under a fixed seed") {
  const fs::path dir = scratch_dir();
  write_two_zone_config(dir / "config.json");
  const std::string base = "synth --config " + (dir / "config.json").string() + " --seed 7";
  REQUIRE(run(base + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run(base + " --out " + (dir / "b").string()) == 0);
  for (const char* name : {"scene.svr", "truth.svr", "zones.geojson", "truth.png"})
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  // a different seed changes the scene
  REQUIRE(run("synth --config " + (dir / "config.json").string() + " --seed 8 --out " +
              (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "scene.svr") != slurp(dir / "c" / "scene.svr"));
}

TEST_CASE("rules on an all-0.5-ndvi scene yields an all-wetland mask") {
  const fs::path dir = scratch_dir();
  // NIR = 0.6, Red = 0.2 makes NDVI exactly 0.5 everywhere
  Raster<float> scene(8, 8, Transform{});
  scene.add_band("Blue", Gridf::Constant(8, 8, 0.3f));
  scene.add_band("Green", Gridf::Constant(8, 8, 0.3f));
  scene.add_band("Red", Gridf::Constant(8, 8, 0.2f));
  scene.add_band("NIR", Gridf::Constant(8, 8, 0.6f));
  write_raster(scene, dir / "flat.svr");

  REQUIRE(run("rules --input " + (dir / "flat.svr").string() + " --index ndvi --out " +
              (dir / "mask.svr").string() + " --png " + (dir / "mask.png").string()) == 0);
  const auto [mask, transform] = read_mask(dir / "mask.svr");
  CHECK((mask.values == 1).all());
  CHECK(fs::exists(dir / "mask.png"));

  // index subcommand writes the expected band
  REQUIRE(run("index --input " + (dir / "flat.svr").string() + " --index ndvi --out " +
              (dir / "ndvi.svr").string()) == 0);
  const Raster<float> ndvi = read_raster(dir / "ndvi.svr");
  CHECK(ndvi.bands()[0].name == "NDVI");
  CHECK(ndvi.band("NDVI")(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("paper-trace emits one row per loop plus the header") {
  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "trace.csv";
  REQUIRE(run("pinn paper-trace --iters 5 --lr 0.1 --out " + csv.string()) == 0);
  const std::string text = slurp(csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(text.find("loop,w1,w2,w3,w4,w5,w6,y_hat,loss") == 0);
  CHECK(text.find("0,0.500000,") != std::string::npos);   // loop-0 row starts at the init state
  CHECK(text.find("0.524979") != std::string::npos);      // y_hat at loop 0
}

TEST_CASE("ad trace emits the worked-example table") {
  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "adtrace.csv";
  REQUIRE(run("ad trace --out " + csv.string()) == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("node,op,value,adjoint") == 0);
  CHECK(text.find("yhat,add,0.5250,1.0000") != std::string::npos);
  CHECK(text.find("v7,sigmoid,0.5250,0.5000") != std::string::npos);
}

TEST_CASE("compare pipeline runs end to end") {
  const fs::path dir = scratch_dir();
  write_two_zone_config(dir / "config.json");
  REQUIRE(run("compare --config " + (dir / "config.json").string() + " --seed 3 --out " +
              (dir / "cmp").string()) == 0);
  CHECK(fs::exists(dir / "cmp" / "metrics.csv"));
  CHECK(fs::exists(dir / "cmp" / "agreements.csv"));
  const std::string summary = slurp(dir / "cmp" / "interpretation.txt");
  CHECK(summary.find("behaves most like") != std::string::npos);
}

TEST_CASE("--mode overrides the configured zonal mode") {
  const fs::path dir = scratch_dir();
  write_two_zone_config(dir / "config.json");
  REQUIRE(run("train --config " + (dir / "config.json").string() +
              " --seed 2 --mode osfa --out " + (dir / "osfa").string()) == 0);
  CHECK(fs::exists(dir / "osfa" / "models" / "osfa.json"));
  CHECK_FALSE(fs::exists(dir / "osfa" / "models" / "A_NDVI.json"));
  CHECK(run("train --config " + (dir / "config.json").string() +
            " --seed 2 --mode bogus --out " + (dir / "osfa2").string()) == 1);
}

TEST_CASE("preprocess, train and evaluate write their artifacts") {
  const fs::path dir = scratch_dir();
  write_two_zone_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string() + " --seed 2 --out ";

  REQUIRE(run("preprocess" + cfg + (dir / "pre").string()) == 0);
  CHECK(fs::exists(dir / "pre" / "splits.csv"));
  CHECK(fs::exists(dir / "pre" / "tiles" / "tile_0_0.svr"));
  CHECK(fs::exists(dir / "pre" / "tiles" / "tile_0_0_mask.svr"));

  REQUIRE(run("train" + cfg + (dir / "trained").string()) == 0);
  CHECK(fs::exists(dir / "trained" / "val_metrics.csv"));
  CHECK(fs::exists(dir / "trained" / "models" / "A_NDVI.json"));
  CHECK(fs::exists(dir / "trained" / "models" / "B_NDWI.json"));

  REQUIRE(run("evaluate" + cfg + (dir / "eval").string()) == 0);
  const std::string metrics = slurp(dir / "eval" / "metrics.csv");
  CHECK(metrics.find("model,zone,tn,fp,fn,tp,precision,recall,f1,accuracy") == 0);
  CHECK(metrics.find("rule/NDVI") != std::string::npos);
}

TEST_CASE("experiment subcommands emit combined reports") {
  const fs::path dir = scratch_dir();
  write_two_zone_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string() + " --seed 4 --out ";

  REQUIRE(run("experiment upsampling" + cfg + (dir / "up").string()) == 0);
  const std::string up = slurp(dir / "up" / "upsampling_comparison.csv");
  CHECK(up.find("raw,") != std::string::npos);
  CHECK(up.find("upsampled,") != std::string::npos);

  REQUIRE(run("experiment svann-vs-osfa" + cfg + (dir / "vs").string()) == 0);
  const std::string summary = slurp(dir / "vs" / "interpretation.txt");
  CHECK(summary.find("selected for zone A") != std::string::npos);
  const std::string metrics = slurp(dir / "vs" / "metrics.csv");
  CHECK(metrics.find("osfa") != std::string::npos);
}

TEST_CASE("pinn demo-transport writes report, history, solution and model") {
  const fs::path dir = scratch_dir();
  std::ofstream(dir / "pinn.json") << R"({"epochs": 120})";
  REQUIRE(run("pinn demo-transport --config " + (dir / "pinn.json").string() +
              " --seed 1 --out " + (dir / "pinn").string()) == 0);
  CHECK(slurp(dir / "pinn" / "transport_report.csv")
            .find("rmse,final_loss,residual_mean_square,residual_mean_abs,epochs") == 0);
  CHECK(fs::exists(dir / "pinn" / "transport_history.csv"));
  CHECK(fs::exists(dir / "pinn" / "transport_solution.csv"));
  CHECK(fs::exists(dir / "pinn" / "transport_net.json"));
}
