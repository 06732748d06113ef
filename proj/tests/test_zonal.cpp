#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "svann/synth.hpp"
#include "svann/zonal.hpp"

using namespace svann;

namespace {

SceneSpec two_zone_spec(double noise_a = 0.0, double noise_b = 0.0) {
  SceneSpec spec;
  spec.width = 64;
  spec.height = 64;
  spec.zones = {{"A", {Eigen::Vector2d(0, 0), Eigen::Vector2d(32, 64)},
                 builtin_ruleset(BuiltinRuleset::ndvi_default), noise_a},
                {"B", {Eigen::Vector2d(32, 0), Eigen::Vector2d(64, 64)},
                 builtin_ruleset(BuiltinRuleset::ndwi_default), noise_b}};
  return spec;
}

struct SmallPipeline {
  TileSet<float> tiles;
  zonal::ZoneAssignment assignment;
};

SmallPipeline small_pipeline(std::uint64_t seed, const SceneSpec& spec) {
  const SyntheticScene scene = generate_synthetic_scene(spec, seed);
  SmallPipeline p;
  p.tiles = tile(scene.raster, scene.mask, 8, true);
  p.tiles = split_dataset(std::move(p.tiles), {}, derive_seed(seed, "split"));
  std::vector<zonal::Zone> zones;
  for (const auto& z : spec.zones) zones.push_back(zonal::Zone::from_box(z.id, z.rect));
  p.assignment = zonal::assign_zones(p.tiles, zones);
  return p;
}

nn::Architecture pixel_arch(int inputs) {
  return nn::make_architecture({inputs, 8, 1}, nn::Activation::sigmoid,
                               nn::Activation::sigmoid);
}

/// Network whose sigmoid output is exactly 0.5 everywhere: all weights zero.
/// With the >= 0.5 decision rule it predicts wetland for every pixel.
zonal::Entry constant_wetland_entry(const std::string& zone_id) {
  zonal::Entry entry;
  entry.name = zone_id + "/const";
  entry.zone_id = zone_id;
  entry.features = {{"Blue", "Green", "Red"}, {"NDVI"}};
  entry.net = nn::init_network(pixel_arch(4), nn::InitScheme::constant(0.0), 0);
  return entry;
}

}  // namespace

TEST_CASE("assign_zones") {
  const SceneSpec spec = two_zone_spec();

  SUBCASE("one zone covering everything takes every tile") {
    SceneSpec one = spec;
    one.zones = {{"all", {Eigen::Vector2d(0, 0), Eigen::Vector2d(64, 64)},
                  builtin_ruleset(BuiltinRuleset::ndvi_default), 0.0}};
    SmallPipeline p = small_pipeline(5, one);
    CHECK(p.assignment.tiles_by_zone.at("all").size() == p.tiles.tiles.size());
    CHECK(p.assignment.unassigned.empty());
  }
  SUBCASE("two half-plane zones partition the tiles") {
    SmallPipeline p = small_pipeline(5, spec);
    const auto& a = p.assignment.tiles_by_zone.at("A");
    const auto& b = p.assignment.tiles_by_zone.at("B");
    CHECK(a.size() + b.size() == p.tiles.tiles.size());
    CHECK(a.size() == b.size());
    // assignment matches the generator's zone rectangles
    for (std::size_t ti : a) {
      const auto& t = p.tiles.tiles[ti];
      CHECK(t.raster.transform().origin_x < 32.0);
    }
  }
  SUBCASE("tiles outside all zones are reported unassigned") {
    const SyntheticScene scene = generate_synthetic_scene(spec, 5);
    TileSet<float> tiles = tile(scene.raster, scene.mask, 8, true);
    const std::vector<zonal::Zone> zones = {
        zonal::Zone::from_box("A", {Eigen::Vector2d(0, 0), Eigen::Vector2d(32, 64)})};
    const auto assignment = zonal::assign_zones(tiles, zones);
    CHECK(assignment.unassigned.size() == tiles.tiles.size() / 2);
  }
  SUBCASE("overlapping zones are rejected") {
    const SyntheticScene scene = generate_synthetic_scene(spec, 5);
    TileSet<float> tiles = tile(scene.raster, scene.mask, 8, true);
    const std::vector<zonal::Zone> zones = {
        zonal::Zone::from_box("A", {Eigen::Vector2d(0, 0), Eigen::Vector2d(40, 64)}),
        zonal::Zone::from_box("B", {Eigen::Vector2d(24, 0), Eigen::Vector2d(64, 64)})};
    CHECK_THROWS_WITH(zonal::assign_zones(tiles, zones), doctest::Contains("overlap"));
  }
}

TEST_CASE("registry mode constraints") {
  zonal::Registry registry;
  registry.mode = zonal::Mode::svann_i;
  zonal::Entry a = constant_wetland_entry("A");
  zonal::Entry b = constant_wetland_entry("B");
  registry.entries = {a, b};
  CHECK_NOTHROW(registry.validate());

  SUBCASE("svann-i rejects differing architectures") {
    registry.entries[1].net = nn::init_network(
        nn::make_architecture({4, 4, 1}, nn::Activation::sigmoid, nn::Activation::sigmoid),
        nn::InitScheme::constant(0.0), 0);
    CHECK_THROWS_WITH(registry.validate(), doctest::Contains("location-invariant"));
    // svann-e stores distinct architectures without complaint
    registry.mode = zonal::Mode::svann_e;
    CHECK_NOTHROW(registry.validate());
    CHECK(registry.entries[0].net.arch.layer_sizes[1] == 8);
    CHECK(registry.entries[1].net.arch.layer_sizes[1] == 4);
  }
  SUBCASE("osfa requires exactly one pooled entry") {
    registry.mode = zonal::Mode::osfa;
    CHECK_THROWS(registry.validate());
    zonal::Entry pooled = constant_wetland_entry(zonal::kOsfaZoneId);
    registry.entries = {pooled};
    CHECK_NOTHROW(registry.validate());
  }
}

TEST_CASE("train_zonal produces the expected model inventory") {
  const SceneSpec spec = two_zone_spec();
  SmallPipeline p = small_pipeline(21, spec);

  zonal::TrainSpec ts;
  ts.arch = pixel_arch(4);
  ts.train.epochs = 3;
  ts.train.learning_rate = 1.0;
  ts.train.batch_size = 64;
  ts.max_pixels = 512;
  ts.seed = 21;

  SUBCASE("svann-i: 2 zones x 2 indices -> 4 models") {
    const zonal::Registry registry = zonal::train_zonal(ts, p.tiles, p.assignment);
    CHECK(registry.entries.size() == 4);
    for (const auto& entry : registry.entries) CHECK(entry.net.arch == ts.arch);
  }
  SUBCASE("osfa: one pooled model with both index features") {
    ts.mode = zonal::Mode::osfa;
    ts.arch = pixel_arch(5);
    const zonal::Registry registry = zonal::train_zonal(ts, p.tiles, p.assignment);
    REQUIRE(registry.entries.size() == 1);
    CHECK(registry.entries[0].zone_id == zonal::kOsfaZoneId);
    CHECK(registry.entries[0].features.indices.size() == 2);
  }
  SUBCASE("svann-e stores per-zone architectures") {
    ts.mode = zonal::Mode::svann_e;
    ts.arch_by_zone["A"] = nn::make_architecture({4, 8, 1}, nn::Activation::sigmoid,
                                                 nn::Activation::sigmoid);
    ts.arch_by_zone["B"] = nn::make_architecture({4, 4, 1}, nn::Activation::sigmoid,
                                                 nn::Activation::sigmoid);
    const zonal::Registry registry = zonal::train_zonal(ts, p.tiles, p.assignment);
    for (const auto& entry : registry.entries)
      CHECK(entry.net.arch.layer_sizes[1] == (entry.zone_id == "A" ? 8 : 4));
  }
  SUBCASE("empty zone training set is an error") {
    zonal::ZoneAssignment empty = p.assignment;
    empty.tiles_by_zone["C"] = {};
    CHECK_THROWS_WITH(zonal::train_zonal(ts, p.tiles, empty), doctest::Contains("empty"));
  }
}

TEST_CASE("evaluate: rule model on its zero-noise zone has F1 = 1") {
  const SceneSpec spec = two_zone_spec();
  SmallPipeline p = small_pipeline(33, spec);
  const std::vector<zonal::RuleModel> rules = {
      {"rule/NDVI", builtin_ruleset(BuiltinRuleset::ndvi_default)},
      {"rule/NDWI", builtin_ruleset(BuiltinRuleset::ndwi_default)}};
  zonal::Registry empty_registry;
  empty_registry.mode = zonal::Mode::svann_i;
  empty_registry.entries = {constant_wetland_entry("A")};

  const auto rows = zonal::evaluate(empty_registry, rules, p.tiles, p.assignment, Split::test);
  bool saw_perfect = false, saw_constant = false;
  for (const auto& row : rows) {
    if (row.model == "rule/NDVI" && row.zone == "A") {
      CHECK(row.summary.f1 == doctest::Approx(1.0));
      saw_perfect = true;
    }
    if (row.model == "A/const" && row.zone == "A") {
      // constant all-wetland predictor: recall 1, precision = prevalence
      CHECK(row.summary.recall == doctest::Approx(1.0));
      const double prevalence = static_cast<double>(row.cm.tp) /
                                static_cast<double>(row.cm.tp + row.cm.fp);
      CHECK(row.summary.precision == doctest::Approx(prevalence));
      saw_constant = true;
    }
  }
  CHECK(saw_perfect);
  CHECK(saw_constant);

  // determinism: evaluating twice gives identical rows
  const auto again = zonal::evaluate(empty_registry, rules, p.tiles, p.assignment, Split::test);
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].model == rows[i].model);
    CHECK(again[i].cm.tp == rows[i].cm.tp);
    CHECK(again[i].summary.f1 == rows[i].summary.f1);
  }
}

TEST_CASE("select_best") {
  zonal::Registry registry;
  registry.mode = zonal::Mode::svann_i;
  for (const char* name : {"A/NDVI", "A/NDWI", "B/NDVI", "B/NDWI"}) {
    zonal::Entry e = constant_wetland_entry(std::string(1, name[0]));
    e.name = name;
    registry.entries.push_back(e);
  }
  auto row = [](const char* model, const char* zone, double f1) {
    zonal::MetricRow r;
    r.model = model;
    r.zone = zone;
    r.summary.f1 = f1;
    return r;
  };

  SUBCASE("argmax per zone, mirroring the published selection pattern") {
    const std::vector<zonal::MetricRow> rows = {
        row("A/NDVI", "A", 0.782), row("A/NDWI", "A", 0.718),
        row("B/NDVI", "B", 0.654), row("B/NDWI", "B", 0.721)};
    const auto best = zonal::select_best(registry, rows);
    CHECK(registry.entries[best.at("A")].name == "A/NDVI");
    CHECK(registry.entries[best.at("B")].name == "B/NDWI");
  }
  SUBCASE("exact tie goes to the first-listed feature") {
    const std::vector<zonal::MetricRow> rows = {
        row("A/NDVI", "A", 0.7), row("A/NDWI", "A", 0.7),
        row("B/NDVI", "B", 0.5), row("B/NDWI", "B", 0.5)};
    const auto best = zonal::select_best(registry, rows);
    CHECK(registry.entries[best.at("A")].name == "A/NDVI");
    CHECK(registry.entries[best.at("B")].name == "B/NDVI");
  }
  SUBCASE("argmax is invariant under strictly increasing transforms") {
    std::vector<std::tuple<std::string, std::string, double>> scored = {
        {"A", "A/NDVI", 0.782}, {"A", "A/NDWI", 0.718},
        {"B", "B/NDVI", 0.654}, {"B", "B/NDWI", 0.721}};
    const auto before = zonal::argmax_by_zone(scored);
    for (auto& [zone, name, value] : scored) value = std::atan(value) + 2.0 * value * value * value;
    const auto after = zonal::argmax_by_zone(scored);
    CHECK(before == after);
  }
}

TEST_CASE("agreement rate") {
  Mask a(4, 4, 1);
  CHECK(zonal::agreement_rate(a, a) == 1.0);

  Mask b(4, 4, 1);
  b.values(0, 0) = 0;
  b.values(1, 1) = kMaskNodata;
  CHECK(zonal::agreement_rate(a, b) == zonal::agreement_rate(b, a));
  CHECK(zonal::agreement_rate(a, b) == doctest::Approx(14.0 / 15.0));

  Mask all_nodata(4, 4, kMaskNodata);
  CHECK(zonal::agreement_rate(a, all_nodata) == 0.0);
  CHECK_THROWS(zonal::agreement_rate(a, Mask(3, 3, 0)));
}

TEST_CASE("compare_report ranks by agreement, ties by listed order") {
  const SceneSpec spec = two_zone_spec();
  SmallPipeline p = small_pipeline(55, spec);
  const zonal::Entry bb = constant_wetland_entry("A");

  SUBCASE("two identical interpretable models tie in listed order") {
    const std::vector<zonal::RuleModel> rules = {
        {"first/NDWI", builtin_ruleset(BuiltinRuleset::ndwi_default)},
        {"second/NDWI", builtin_ruleset(BuiltinRuleset::ndwi_default)}};
    const zonal::Entry* bbs[] = {&bb};
    const auto report = zonal::compare_report(bbs, rules, p.tiles, p.assignment, Split::test);
    double first_agreement = -1, second_agreement = -2;
    int first_rank = 0, second_rank = 0;
    for (const auto& e : report.agreements) {
      if (e.zone != "A") continue;
      if (e.interpretable == "first/NDWI") { first_agreement = e.agreement; first_rank = e.rank; }
      if (e.interpretable == "second/NDWI") { second_agreement = e.agreement; second_rank = e.rank; }
    }
    CHECK(first_agreement == second_agreement);
    CHECK(first_rank == 1);
    CHECK(second_rank == 2);
  }
  SUBCASE("rank-1 is the declared interpretation and the report is deterministic") {
    const std::vector<zonal::RuleModel> rules = {
        {"rule/NDVI", builtin_ruleset(BuiltinRuleset::ndvi_default)},
        {"rule/NDWI", builtin_ruleset(BuiltinRuleset::ndwi_default)}};
    const zonal::Entry* bbs[] = {&bb};
    const auto a = zonal::compare_report(bbs, rules, p.tiles, p.assignment, Split::test);
    const auto b = zonal::compare_report(bbs, rules, p.tiles, p.assignment, Split::test);
    REQUIRE(a.agreements.size() == b.agreements.size());
    for (std::size_t i = 0; i < a.agreements.size(); ++i) {
      CHECK(a.agreements[i].agreement == b.agreements[i].agreement);
      CHECK(a.agreements[i].rank == b.agreements[i].rank);
    }
    CHECK(a.interpretation("A/const", "A").has_value());
    CHECK(zonal::interpretation_summary(a).find("behaves most like") != std::string::npos);
  }
}
