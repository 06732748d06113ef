// svann command-line tool: synthetic scenes, preprocessing, index and rule
// maps, zonal training/evaluation, the comparison reports, both published
// experiment designs, the PINN demos, and the autodiff trace table.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error.
// Every subcommand is deterministic under a fixed config and seed; output
// files are written atomically (temp + rename).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "svann/csv.hpp"
#include "svann/indices.hpp"
#include "svann/metrics.hpp"
#include "svann/pinn.hpp"
#include "svann/png.hpp"
#include "svann/raster_io.hpp"
#include "svann/rules.hpp"
#include "svann/synth.hpp"
#include "svann/zonal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svann;

namespace {

json load_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path.string() + "'");
  json doc;
  f >> doc;
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  detail::write_file_atomic(path, text);
}

std::string normalize_index_id(std::string id) {
  for (char& c : id) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return id;
}

RuleSet rule_from_config(const json& rule) {
  if (rule.is_string()) {
    const std::string name = rule.get<std::string>();
    if (name == "ndvi_default") return builtin_ruleset(BuiltinRuleset::ndvi_default);
    if (name == "ndwi_default") return builtin_ruleset(BuiltinRuleset::ndwi_default);
    throw std::runtime_error("unknown builtin ruleset '" + name + "'");
  }
  return ruleset_from_json(rule);
}

Eigen::AlignedBox2d rect_from_config(const json& rect) {
  if (!rect.is_array() || rect.size() != 4)
    throw std::runtime_error("zone rect must be [x0,y0,x1,y1]");
  return {Eigen::Vector2d(rect[0].get<double>(), rect[1].get<double>()),
          Eigen::Vector2d(rect[2].get<double>(), rect[3].get<double>())};
}

SceneSpec scene_spec_from_config(const json& synth) {
  SceneSpec spec;
  spec.width = synth.value("width", 96);
  spec.height = synth.value("height", 96);
  if (synth.contains("transform")) {
    const auto t = synth["transform"].get<std::vector<double>>();
    if (t.size() != 4) throw std::runtime_error("transform must be [ox,oy,psx,psy]");
    spec.transform = {t[0], t[1], t[2], t[3]};
  }
  for (const auto& z : synth.at("zones"))
    spec.zones.push_back({z.at("id").get<std::string>(), rect_from_config(z.at("rect")),
                          rule_from_config(z.at("rule")), z.value("noise", 0.0)});
  return spec;
}

struct LoadedScene {
  Raster<float> raster;
  Mask mask;
  std::vector<zonal::Zone> zones;
  PolygonSet polygons;
};

/// Materialize the configured scene: either a seeded synthetic scene or
/// raster + mask (or polygons to rasterize) from files. Zone extents come
/// from the "zones" key, defaulting to the synthetic zone rectangles.
LoadedScene load_scene(const json& config, std::uint64_t seed) {
  const json& scene = config.at("scene");
  LoadedScene out;
  if (scene.contains("synthetic")) {
    SceneSpec spec = scene_spec_from_config(scene["synthetic"]);
    SyntheticScene synth = generate_synthetic_scene(spec, seed);
    out.raster = std::move(synth.raster);
    out.mask = std::move(synth.mask);
    out.polygons = std::move(synth.polygons);
    for (const auto& zone : spec.zones)
      out.zones.push_back(zonal::Zone::from_box(zone.id, zone.rect));
  } else {
    out.raster = read_raster(scene.at("file").get<std::string>());
    if (scene.contains("mask")) {
      out.mask = read_mask(scene.at("mask").get<std::string>()).first;
    } else if (scene.contains("polygons")) {
      out.polygons = read_polygons(scene.at("polygons").get<std::string>());
      out.mask = rasterize_polygons(out.polygons, out.raster.width(), out.raster.height(),
                                    out.raster.transform());
    } else {
      throw std::runtime_error("scene.file needs either scene.mask or scene.polygons");
    }
  }
  if (config.contains("zones")) {
    out.zones.clear();
    for (const auto& z : config["zones"])
      out.zones.push_back(
          zonal::Zone::from_box(z.at("id").get<std::string>(), rect_from_config(z.at("rect"))));
  }
  if (out.zones.empty()) throw std::runtime_error("no zones configured");
  return out;
}

struct Pipeline {
  TileSet<float> tiles;
  zonal::ZoneAssignment assignment;
  std::vector<zonal::Zone> zones;
};

Pipeline run_preprocess(const LoadedScene& scene, const json& config, std::uint64_t seed,
                        int upsample_override = 0) {
  const json pre = config.value("preprocess", json::object());
  int factor = pre.value("upsample_factor", 1);
  if (upsample_override > 0) factor = upsample_override;
  const auto tile_size = pre.value("tile_size", Eigen::Index{8});
  const bool drop_partial = pre.value("drop_partial", true);
  SplitFractions fractions;
  if (pre.contains("fractions")) {
    const auto f = pre["fractions"].get<std::vector<double>>();
    if (f.size() != 3) throw std::runtime_error("fractions must be [train,val,test]");
    fractions = {f[0], f[1], f[2]};
  }

  Raster<float> raster = scene.raster;
  Mask mask = scene.mask;
  if (factor > 1) {
    raster = bilinear_upsample(raster, factor);
    mask = upsample_mask_nearest(mask, factor);
  }
  Pipeline p;
  p.tiles = tile(raster, mask, tile_size, drop_partial);
  p.tiles = split_dataset(std::move(p.tiles), fractions, derive_seed(seed, "split"));
  p.zones = scene.zones;
  p.assignment = zonal::assign_zones(p.tiles, p.zones);
  return p;
}

zonal::TrainSpec train_spec_from_config(const json& config, std::uint64_t seed) {
  const json models = config.value("models", json::object());
  zonal::TrainSpec spec;
  spec.mode = zonal::mode_from_name(models.value("mode", "svann-i"));
  if (models.contains("indices")) {
    spec.candidate_indices.clear();
    for (const auto& id : models["indices"])
      spec.candidate_indices.push_back(normalize_index_id(id.get<std::string>()));
  }
  if (models.contains("bands"))
    spec.feature_bands = models["bands"].get<std::vector<std::string>>();

  std::vector<int> hidden = models.value("hidden", std::vector<int>{8});
  const auto activation =
      nn::activation_from_name(models.value("activation", std::string("sigmoid")));
  std::vector<int> sizes = {1};  // input size fixed up per model by train_zonal
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  spec.arch = nn::make_architecture(sizes, activation, nn::Activation::sigmoid);

  const json tc = models.value("train", json::object());
  spec.train.learning_rate = tc.value("learning_rate", 2.0);
  spec.train.epochs = tc.value("epochs", 40);
  spec.train.batch_size = tc.value("batch_size", 128);
  const std::string loss = tc.value("loss", "bce");
  spec.train.loss = loss == "mse" ? nn::Loss::mse : nn::Loss::binary_cross_entropy;
  spec.max_pixels = models.value("max_pixels", std::size_t{4096});
  spec.seed = seed;
  return spec;
}

std::string metrics_csv(const std::vector<zonal::MetricRow>& rows) {
  std::string out = csv_row({"model", "zone", "tn", "fp", "fn", "tp", "precision", "recall",
                             "f1", "accuracy"});
  for (const auto& r : rows)
    out += csv_row({r.model, r.zone, std::to_string(r.cm.tn), std::to_string(r.cm.fp),
                    std::to_string(r.cm.fn), std::to_string(r.cm.tp),
                    csv_num(r.summary.precision), csv_num(r.summary.recall),
                    csv_num(r.summary.f1), csv_num(r.summary.accuracy)});
  return out;
}

std::string agreements_csv(const zonal::ComparativeReport& report) {
  std::string out =
      csv_row({"black_box", "interpretable", "zone", "agreement", "f1_gap", "rank"});
  for (const auto& e : report.agreements)
    out += csv_row({e.black_box, e.interpretable, e.zone, csv_num(e.agreement),
                    csv_num(e.f1_gap), std::to_string(e.rank)});
  return out;
}

std::vector<zonal::RuleModel> default_rule_models() {
  return {{"rule/NDVI", builtin_ruleset(BuiltinRuleset::ndvi_default)},
          {"rule/NDWI", builtin_ruleset(BuiltinRuleset::ndwi_default)}};
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

void cmd_synth(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir) {
  const json config = load_json(config_path);
  const json& synth = config.contains("scene") ? config.at("scene").at("synthetic")
                                               : config.at("synthetic");
  SceneSpec spec = scene_spec_from_config(synth);
  SyntheticScene scene = generate_synthetic_scene(spec, seed);
  fs::create_directories(out_dir);
  write_raster(scene.raster, out_dir / "scene.svr");
  write_mask(scene.mask, scene.raster.transform(), out_dir / "truth.svr");
  write_polygons(scene.polygons, out_dir / "zones.geojson");
  render_mask_png(scene.mask, out_dir / "truth.png");
  std::cout << "wrote scene " << scene.raster.width() << "x" << scene.raster.height()
            << " with " << spec.zones.size() << " zones to " << out_dir.string() << "\n";
}

void cmd_preprocess(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir) {
  const json config = load_json(config_path);
  LoadedScene scene = load_scene(config, seed);
  Pipeline p = run_preprocess(scene, config, seed);
  fs::create_directories(out_dir / "tiles");
  std::string split_csv = csv_row({"tile", "row", "col", "split"});
  const char* split_names[3] = {"train", "val", "test"};
  for (std::size_t i = 0; i < p.tiles.tiles.size(); ++i) {
    const auto& t = p.tiles.tiles[i];
    const std::string stem =
        "tile_" + std::to_string(t.row) + "_" + std::to_string(t.col);
    write_raster(t.raster, out_dir / "tiles" / (stem + ".svr"));
    write_mask(t.mask, t.raster.transform(), out_dir / "tiles" / (stem + "_mask.svr"));
    split_csv += csv_row({stem, std::to_string(t.row), std::to_string(t.col),
                          split_names[static_cast<int>(p.tiles.split[i])]});
  }
  write_text(out_dir / "splits.csv", split_csv);
  std::cout << "wrote " << p.tiles.tiles.size() << " tiles (" << p.tiles.tile_size << "px) to "
            << (out_dir / "tiles").string() << "\n";
}

void cmd_index(const fs::path& input, std::string index_id, const fs::path& output) {
  index_id = normalize_index_id(index_id);
  const Raster<float> raster = read_raster(input);
  const IndexBand<float> band = compute_index(raster, index_id);
  write_raster(index_band_to_raster(band, raster.transform()), output);
  std::cout << "wrote " << index_id << " band to " << output.string() << "\n";
}

void cmd_rules(const fs::path& input, std::string index_id,
               const std::optional<fs::path>& ruleset_path, const fs::path& output,
               const std::optional<fs::path>& png_path) {
  index_id = normalize_index_id(index_id);
  RuleSet rules;
  if (ruleset_path) {
    rules = load_ruleset(*ruleset_path);
  } else if (index_id == "NDVI") {
    rules = builtin_ruleset(BuiltinRuleset::ndvi_default);
  } else if (index_id == "NDWI") {
    rules = builtin_ruleset(BuiltinRuleset::ndwi_default);
  } else {
    throw std::runtime_error("no builtin ruleset for index '" + index_id + "'");
  }
  const Raster<float> raster = read_raster(input);
  const Mask mask = classify(compute_index(raster, rules.index_id), rules);
  write_mask(mask, raster.transform(), output);
  if (png_path) render_mask_png(mask, *png_path);
  std::cout << "wrote rule-based " << rules.index_id << " mask to " << output.string() << "\n";
}

void cmd_train(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir,
               const std::string& mode_override = "") {
  json config = load_json(config_path);
  if (!mode_override.empty()) config["models"]["mode"] = mode_override;
  LoadedScene scene = load_scene(config, seed);
  Pipeline p = run_preprocess(scene, config, seed);
  zonal::Registry registry = zonal::train_zonal(train_spec_from_config(config, seed), p.tiles,
                                                p.assignment);
  fs::create_directories(out_dir / "models");
  for (const auto& entry : registry.entries) {
    std::string file = entry.name;
    for (char& c : file)
      if (c == '/') c = '_';
    nn::save_network(entry.net, out_dir / "models" / (file + ".json"));
  }
  const auto val_rows = zonal::evaluate(registry, {}, p.tiles, p.assignment, Split::val);
  write_text(out_dir / "val_metrics.csv", metrics_csv(val_rows));
  std::cout << "trained " << registry.entries.size() << " models ("
            << zonal::mode_name(registry.mode) << "); validation metrics in "
            << (out_dir / "val_metrics.csv").string() << "\n";
}

void cmd_evaluate(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir,
                  const std::string& mode_override = "") {
  json config = load_json(config_path);
  if (!mode_override.empty()) config["models"]["mode"] = mode_override;
  LoadedScene scene = load_scene(config, seed);
  Pipeline p = run_preprocess(scene, config, seed);
  zonal::Registry registry = zonal::train_zonal(train_spec_from_config(config, seed), p.tiles,
                                                p.assignment);
  const auto rules = default_rule_models();
  const auto rows = zonal::evaluate(registry, rules, p.tiles, p.assignment, Split::test);
  fs::create_directories(out_dir);
  write_text(out_dir / "metrics.csv", metrics_csv(rows));
  std::cout << metrics_csv(rows);
}

void cmd_compare(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir,
                 const std::string& mode_override = "") {
  json config = load_json(config_path);
  if (!mode_override.empty()) config["models"]["mode"] = mode_override;
  LoadedScene scene = load_scene(config, seed);
  Pipeline p = run_preprocess(scene, config, seed);
  zonal::Registry registry = zonal::train_zonal(train_spec_from_config(config, seed), p.tiles,
                                                p.assignment);
  const auto val_rows = zonal::evaluate(registry, {}, p.tiles, p.assignment, Split::val);
  const auto best = zonal::select_best(registry, val_rows);

  std::vector<const zonal::Entry*> black_box;
  for (const auto& [zone, idx] : best) black_box.push_back(&registry.entries[idx]);
  if (registry.mode == zonal::Mode::osfa)
    for (const auto& entry : registry.entries) black_box.push_back(&entry);

  const auto rules = default_rule_models();
  const auto report = zonal::compare_report(black_box, rules, p.tiles, p.assignment, Split::test);
  fs::create_directories(out_dir);
  write_text(out_dir / "metrics.csv", metrics_csv(report.metrics));
  write_text(out_dir / "agreements.csv", agreements_csv(report));
  write_text(out_dir / "interpretation.txt", zonal::interpretation_summary(report));
  std::cout << zonal::interpretation_summary(report);
}

void cmd_experiment_upsampling(const fs::path& config_path, std::uint64_t seed,
                               const fs::path& out_dir) {
  const json config = load_json(config_path);
  const int factor = config.value("preprocess", json::object()).value("upsample_factor", 4);
  LoadedScene scene = load_scene(config, seed);

  std::string combined = csv_row({"pipeline", "model", "zone", "tn", "fp", "fn", "tp",
                                  "precision", "recall", "f1", "accuracy"});
  for (const auto& [pipeline_name, up] :
       {std::pair<std::string, int>{"raw", 1}, {"upsampled", factor}}) {
    Pipeline p = run_preprocess(scene, config, seed, up);
    zonal::Registry registry = zonal::train_zonal(train_spec_from_config(config, seed),
                                                  p.tiles, p.assignment);
    const auto rows = zonal::evaluate(registry, {}, p.tiles, p.assignment, Split::test);
    for (const auto& r : rows)
      combined += csv_row({pipeline_name, r.model, r.zone, std::to_string(r.cm.tn),
                           std::to_string(r.cm.fp), std::to_string(r.cm.fn),
                           std::to_string(r.cm.tp), csv_num(r.summary.precision),
                           csv_num(r.summary.recall), csv_num(r.summary.f1),
                           csv_num(r.summary.accuracy)});
  }
  fs::create_directories(out_dir);
  write_text(out_dir / "upsampling_comparison.csv", combined);
  std::cout << combined;
}

void cmd_experiment_svann_vs_osfa(const fs::path& config_path, std::uint64_t seed,
                                  const fs::path& out_dir) {
  const json config = load_json(config_path);
  LoadedScene scene = load_scene(config, seed);
  Pipeline p = run_preprocess(scene, config, seed);

  zonal::TrainSpec svann_spec = train_spec_from_config(config, seed);
  if (svann_spec.mode == zonal::Mode::osfa) svann_spec.mode = zonal::Mode::svann_i;
  zonal::Registry svann = zonal::train_zonal(svann_spec, p.tiles, p.assignment);

  zonal::TrainSpec osfa_spec = svann_spec;
  osfa_spec.mode = zonal::Mode::osfa;
  zonal::Registry osfa = zonal::train_zonal(osfa_spec, p.tiles, p.assignment);

  const auto val_rows = zonal::evaluate(svann, {}, p.tiles, p.assignment, Split::val);
  const auto best = zonal::select_best(svann, val_rows);

  std::vector<const zonal::Entry*> black_box;
  for (const auto& [zone, idx] : best) black_box.push_back(&svann.entries[idx]);
  black_box.push_back(&osfa.entries[0]);

  const auto rules = default_rule_models();
  const auto report = zonal::compare_report(black_box, rules, p.tiles, p.assignment, Split::test);

  fs::create_directories(out_dir);
  write_text(out_dir / "metrics.csv", metrics_csv(report.metrics));
  write_text(out_dir / "agreements.csv", agreements_csv(report));
  std::string summary = zonal::interpretation_summary(report);
  for (const auto& [zone, idx] : best)
    summary += "selected for zone " + zone + ": " + svann.entries[idx].name + "\n";
  write_text(out_dir / "interpretation.txt", summary);
  std::cout << summary;
}

void cmd_pinn_transport(const std::optional<fs::path>& config_path, std::uint64_t seed,
                        const fs::path& out_dir) {
  pinn::TransportConfig config;
  config.seed = seed;
  if (config_path) {
    const json doc = load_json(*config_path);
    config.train.epochs = doc.value("epochs", config.train.epochs);
    config.train.learning_rate = doc.value("learning_rate", config.train.learning_rate);
    config.train.lr_decay = doc.value("lr_decay", config.train.lr_decay);
    config.train.clip_norm = doc.value("clip_norm", config.train.clip_norm);
    config.condition_weight = doc.value("condition_weight", config.condition_weight);
    config.collocation_nx = doc.value("collocation_nx", config.collocation_nx);
    config.collocation_nt = doc.value("collocation_nt", config.collocation_nt);
    if (doc.contains("hidden")) {
      std::vector<int> sizes = {2};
      for (int h : doc["hidden"].get<std::vector<int>>()) sizes.push_back(h);
      sizes.push_back(1);
      config.arch = nn::make_architecture(sizes, nn::Activation::tanh, nn::Activation::linear);
    }
  }
  const auto [net, report] = pinn::solve_transport(config);

  fs::create_directories(out_dir);
  std::string report_csv = csv_row({"rmse", "final_loss", "residual_mean_square",
                                    "residual_mean_abs", "epochs"});
  report_csv += csv_row({csv_num(report.rmse), csv_num(report.final_loss, 8),
                         csv_num(report.residual_mean_square, 8),
                         csv_num(report.residual_mean_abs, 8),
                         std::to_string(report.loss_history.size())});
  write_text(out_dir / "transport_report.csv", report_csv);

  std::string history = csv_row({"epoch", "loss"});
  for (std::size_t i = 0; i < report.loss_history.size(); ++i)
    history += csv_row({std::to_string(i), csv_num(report.loss_history[i], 8)});
  write_text(out_dir / "transport_history.csv", history);

  std::string solution = csv_row({"x", "t", "predicted", "exact"});
  for (int i = 0; i < config.eval_nx; ++i) {
    const double x = config.x_max * i / (config.eval_nx - 1.0);
    for (int j = 0; j < config.eval_nt; ++j) {
      const double t = config.t_max * j / (config.eval_nt - 1.0);
      solution += csv_row({csv_num(x, 4), csv_num(t, 4),
                           csv_num(nn::predict(net, Eigen::Vector2d(x, t))(0)),
                           csv_num(pinn::exact_transport(x, t, config.velocity))});
    }
  }
  write_text(out_dir / "transport_solution.csv", solution);
  nn::save_network(net, out_dir / "transport_net.json");
  std::cout << "transport solve: rmse=" << csv_num(report.rmse) << " (report in "
            << out_dir.string() << ")\n";
}

std::string paper_trace_csv(int iters, double lr) {
  auto rows = pinn::run_paper_trace(iters, lr);
  std::string out = csv_row({"loop", "w1", "w2", "w3", "w4", "w5", "w6", "y_hat", "loss"});
  for (const auto& r : rows) {
    std::vector<std::string> fields = {std::to_string(r.loop)};
    for (double w : r.w) fields.push_back(csv_num(w));
    fields.push_back(csv_num(r.y_hat));
    fields.push_back(csv_num(r.loss));
    out += csv_row(fields);
  }
  return out;
}

std::string ad_trace_csv() {
  ad::ToyGraph toy = ad::make_toy_graph();
  std::string out = csv_row({"node", "op", "value", "adjoint"});
  for (const auto& entry : ad::trace_table(toy.tape, toy.yhat, toy.trace_rows))
    out += csv_row({entry.label, ad::op_name(entry.op), csv_num(entry.value, 4),
                    csv_num(entry.adjoint, 4)});
  return out;
}

void emit(const std::optional<fs::path>& out_path, const std::string& text) {
  if (out_path) {
    if (out_path->has_parent_path()) fs::create_directories(out_path->parent_path());
    write_text(*out_path, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svann: zonal wetland models, interpretable baselines, and PINN demos"};
  app.require_subcommand(1);

  std::string config_path, input_path, output_path, out_dir = "out", index_id = "ndvi";
  std::string ruleset_path, png_path, mode_flag;
  std::uint64_t seed = 0;
  int iters = 5;
  double lr = 0.1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "JSON config file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", seed, "root seed (default 0)");
    cmd->add_option("--out", out_dir, "output directory");
  };
  auto add_mode = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode_flag, "zonal mode override (svann-i|svann-e|osfa)")
        ->check(CLI::IsMember({"svann-i", "svann-e", "osfa"}));
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic multi-zone scene");
  add_common(synth, true);
  synth->callback([&] { cmd_synth(config_path, seed, out_dir); });

  auto* preprocess = app.add_subcommand("preprocess", "crop/upsample/tile/split a scene");
  add_common(preprocess, true);
  preprocess->callback([&] { cmd_preprocess(config_path, seed, out_dir); });

  auto* index = app.add_subcommand("index", "compute a remote sensing index band");
  index->add_option("--input", input_path, "input .svr raster")->required();
  index->add_option("--index", index_id, "index id (ndvi|ndwi|...)");
  index->add_option("--out", output_path, "output .svr path")->required();
  index->callback([&] { cmd_index(input_path, index_id, output_path); });

  auto* rules_cmd = app.add_subcommand("rules", "classify a scene with a ruleset");
  rules_cmd->add_option("--input", input_path, "input .svr raster")->required();
  rules_cmd->add_option("--index", index_id, "index id (ndvi|ndwi)");
  rules_cmd->add_option("--ruleset", ruleset_path, "ruleset JSON (default: builtin)");
  rules_cmd->add_option("--out", output_path, "output mask .svr path")->required();
  rules_cmd->add_option("--png", png_path, "optional rendered mask PNG");
  rules_cmd->callback([&] {
    cmd_rules(input_path, index_id,
              ruleset_path.empty() ? std::nullopt : std::optional<fs::path>(ruleset_path),
              output_path, png_path.empty() ? std::nullopt : std::optional<fs::path>(png_path));
  });

  auto* train = app.add_subcommand("train", "train the zonal model registry");
  add_common(train, true);
  add_mode(train);
  train->callback([&] { cmd_train(config_path, seed, out_dir, mode_flag); });

  auto* evaluate = app.add_subcommand("evaluate", "test-split metrics for all models");
  add_common(evaluate, true);
  add_mode(evaluate);
  evaluate->callback([&] { cmd_evaluate(config_path, seed, out_dir, mode_flag); });

  auto* compare = app.add_subcommand("compare", "comparison-based interpretation report");
  add_common(compare, true);
  add_mode(compare);
  compare->callback([&] { cmd_compare(config_path, seed, out_dir, mode_flag); });

  auto* experiment = app.add_subcommand("experiment", "published experiment designs");
  experiment->require_subcommand(1);
  auto* upsampling =
      experiment->add_subcommand("upsampling", "same models with and without upsampling");
  add_common(upsampling, true);
  upsampling->callback([&] { cmd_experiment_upsampling(config_path, seed, out_dir); });
  auto* vs_osfa = experiment->add_subcommand("svann-vs-osfa",
                                             "zonal models vs pooled and rule baselines");
  add_common(vs_osfa, true);
  vs_osfa->callback([&] { cmd_experiment_svann_vs_osfa(config_path, seed, out_dir); });

  auto* pinn_cmd = app.add_subcommand("pinn", "physics-informed network demos");
  pinn_cmd->require_subcommand(1);
  auto* transport = pinn_cmd->add_subcommand("demo-transport", "train the transport solver");
  add_common(transport, false);
  transport->callback([&] {
    cmd_pinn_transport(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path),
                       seed, out_dir);
  });
  auto* trace = pinn_cmd->add_subcommand("paper-trace", "closed-form weight-update trace");
  trace->add_option("--iters", iters, "iterations (default 5)");
  trace->add_option("--lr", lr, "learning rate (default 0.1)");
  trace->add_option("--out", output_path, "output CSV (default stdout)");
  trace->callback([&] {
    emit(output_path.empty() ? std::nullopt : std::optional<fs::path>(output_path),
         paper_trace_csv(iters, lr));
  });

  auto* ad_cmd = app.add_subcommand("ad", "automatic differentiation utilities");
  ad_cmd->require_subcommand(1);
  auto* ad_trace = ad_cmd->add_subcommand("trace", "forward/backward table of the demo graph");
  ad_trace->add_option("--out", output_path, "output CSV (default stdout)");
  ad_trace->callback([&] {
    emit(output_path.empty() ? std::nullopt : std::optional<fs::path>(output_path),
         ad_trace_csv());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
