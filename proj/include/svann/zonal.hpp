// Zonal model registry and the comparison-based interpretation report.
//
// Modes:
//   svann_i  one model per zone, all zones share one architecture
//   svann_e  one model per zone, architectures may differ by zone
//   osfa     a single pooled model applied to every zone
//
// train_zonal fits one pixel classifier per (zone, candidate index); OSFA
// pools every zone's pixels and every candidate index into one model.
// select_best picks each zone's winner by validation F1. compare_report
// then ranks the interpretable rule models against each trained model by
// prediction agreement (primary) and |F1 gap| (secondary); the rank-1 rule
// is the declared physical interpretation for that zone. Ties everywhere
// resolve in listed order.

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "svann/indices.hpp"
#include "svann/metrics.hpp"
#include "svann/network.hpp"
#include "svann/raster.hpp"
#include "svann/rules.hpp"

namespace svann::zonal {

struct Zone {
  std::string id;
  Polygon boundary;

  static Zone from_box(std::string id, const Eigen::AlignedBox2d& box) {
    Zone z;
    z.boundary = box_polygon_(box);
    z.boundary.label = id;
    z.id = std::move(id);
    return z;
  }
  bool contains(const Eigen::Vector2d& p) const { return polygon_contains(boundary, p); }

 private:
  static Polygon box_polygon_(const Eigen::AlignedBox2d& box) {
    Polygon poly;
    poly.exterior = {{box.min().x(), box.min().y()},
                     {box.max().x(), box.min().y()},
                     {box.max().x(), box.max().y()},
                     {box.min().x(), box.max().y()}};
    return poly;
  }
};

enum class Mode { svann_i, svann_e, osfa };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::svann_i: return "svann-i";
    case Mode::svann_e: return "svann-e";
    case Mode::osfa: return "osfa";
  }
  return "?";
}

inline Mode mode_from_name(const std::string& name) {
  if (name == "svann-i") return Mode::svann_i;
  if (name == "svann-e") return Mode::svann_e;
  if (name == "osfa") return Mode::osfa;
  throw std::invalid_argument("unknown zonal mode '" + name + "'");
}

/// Per-pixel feature layout: the listed band values followed by the listed
/// index values, mirroring color channels joined with an index channel.
struct FeatureSpec {
  std::vector<std::string> bands = {"Blue", "Green", "Red"};
  std::vector<std::string> indices;

  int dim() const { return static_cast<int>(bands.size() + indices.size()); }
};

inline constexpr const char* kOsfaZoneId = "*";

struct Entry {
  std::string name;     // e.g. "A/NDVI" or "osfa"
  std::string zone_id;  // kOsfaZoneId when the model serves every zone
  FeatureSpec features;
  nn::Network net;
};

struct Registry {
  Mode mode = Mode::svann_i;
  std::vector<Entry> entries;

  /// Mode constraints: svann_i entries share one architecture; osfa has
  /// exactly one entry covering all zones.
  void validate() const {
    if (mode == Mode::osfa) {
      if (entries.size() != 1 || entries[0].zone_id != kOsfaZoneId)
        throw std::invalid_argument("osfa registry must hold exactly one pooled model");
      return;
    }
    if (entries.empty()) throw std::invalid_argument("registry has no entries");
    if (mode == Mode::svann_i)
      for (const auto& e : entries)
        if (!(e.net.arch == entries[0].net.arch))
          throw std::invalid_argument(
              "svann-i requires a location-invariant architecture; entry '" + e.name +
              "' differs");
  }
};

// ---------------------------------------------------------------------------
// Zone assignment
// ---------------------------------------------------------------------------

struct ZoneAssignment {
  std::map<std::string, std::vector<std::size_t>> tiles_by_zone;
  std::vector<std::size_t> unassigned;
};

/// Assign tiles to zones by tile-center membership. A tile center inside
/// more than one zone means the zones overlap, which is rejected.
inline ZoneAssignment assign_zones(const TileSet<float>& tiles, std::span<const Zone> zones) {
  ZoneAssignment out;
  for (const auto& z : zones) out.tiles_by_zone[z.id];  // keep empty zones visible
  for (std::size_t i = 0; i < tiles.tiles.size(); ++i) {
    const auto& tile = tiles.tiles[i];
    const Transform& t = tile.raster.transform();
    const Eigen::Vector2d center =
        t.pixel_center(tile.raster.height() / 2, tile.raster.width() / 2);
    const Zone* owner = nullptr;
    for (const auto& z : zones) {
      if (!z.contains(center)) continue;
      if (owner)
        throw std::invalid_argument("zones '" + owner->id + "' and '" + z.id +
                                    "' overlap at tile (" + std::to_string(tile.row) + "," +
                                    std::to_string(tile.col) + ")");
      owner = &z;
    }
    if (owner)
      out.tiles_by_zone[owner->id].push_back(i);
    else
      out.unassigned.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pixel datasets and prediction
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
std::vector<IndexBand<T>> tile_indices(const Raster<T>& raster, const FeatureSpec& features) {
  std::vector<IndexBand<T>> out;
  for (const auto& id : features.indices) out.push_back(compute_index(raster, id));
  return out;
}

}  // namespace detail

/// Collect per-pixel (features, label) rows from the chosen split of the
/// given tiles. Nodata truth or index pixels are skipped. When the pool
/// exceeds max_pixels (0 = unlimited), a seeded uniform subsample keeps the
/// training budget bounded.
inline nn::Dataset pixel_dataset(const TileSet<float>& tiles,
                                 std::span<const std::size_t> tile_indices, Split split,
                                 const FeatureSpec& features, std::size_t max_pixels,
                                 std::uint64_t seed) {
  std::vector<std::array<double, 16>> rows;  // generous fixed-width scratch
  std::vector<double> labels;
  const int dim = features.dim();
  if (dim > 16) throw std::invalid_argument("pixel_dataset: more than 16 features");

  for (std::size_t ti : tile_indices) {
    if (!tiles.split.empty() && tiles.split[ti] != split) continue;
    const auto& tile = tiles.tiles[ti];
    const auto index_bands = detail::tile_indices(tile.raster, features);
    for (Eigen::Index r = 0; r < tile.raster.height(); ++r)
      for (Eigen::Index c = 0; c < tile.raster.width(); ++c) {
        const std::uint8_t truth = tile.mask.values(r, c);
        if (truth == kMaskNodata) continue;
        bool skip = false;
        for (const auto& band : index_bands)
          if (band.nodata(r, c)) { skip = true; break; }
        if (skip) continue;
        std::array<double, 16> row{};
        int k = 0;
        for (const auto& name : features.bands)
          row[static_cast<std::size_t>(k++)] = static_cast<double>(tile.raster.band(name)(r, c));
        for (const auto& band : index_bands)
          row[static_cast<std::size_t>(k++)] = static_cast<double>(band.values(r, c));
        rows.push_back(row);
        labels.push_back(static_cast<double>(truth));
      }
  }

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (max_pixels > 0 && rows.size() > max_pixels) {
    SplitMix64 rng(derive_seed(seed, "pixel_dataset/subsample"));
    shuffle(order, rng);
    order.resize(max_pixels);
  }

  nn::Dataset data;
  data.features.resize(static_cast<Eigen::Index>(order.size()), dim);
  data.labels.resize(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int k = 0; k < dim; ++k)
      data.features(static_cast<Eigen::Index>(i), k) = rows[order[i]][static_cast<std::size_t>(k)];
    data.labels(static_cast<Eigen::Index>(i)) = labels[order[i]];
  }
  return data;
}

/// Network predictions for one tile; 0.5 decision threshold, nodata where
/// any index feature is undefined.
inline Mask predict_mask(const Entry& entry, const Tile<float>& tile) {
  const auto index_bands = detail::tile_indices(tile.raster, entry.features);
  Mask out(tile.raster.width(), tile.raster.height(), kMaskNodata);
  Eigen::VectorXd x(entry.features.dim());
  for (Eigen::Index r = 0; r < tile.raster.height(); ++r)
    for (Eigen::Index c = 0; c < tile.raster.width(); ++c) {
      bool skip = false;
      for (const auto& band : index_bands)
        if (band.nodata(r, c)) { skip = true; break; }
      if (skip) continue;
      int k = 0;
      for (const auto& name : entry.features.bands)
        x(k++) = static_cast<double>(tile.raster.band(name)(r, c));
      for (const auto& band : index_bands) x(k++) = static_cast<double>(band.values(r, c));
      out.values(r, c) = nn::predict(entry.net, x)(0) >= 0.5 ? 1 : 0;
    }
  return out;
}

struct RuleModel {
  std::string name;
  RuleSet rules;
};

inline Mask predict_mask(const RuleModel& model, const Tile<float>& tile) {
  return classify(compute_index(tile.raster, model.rules.index_id), model.rules);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainSpec {
  Mode mode = Mode::svann_i;
  std::vector<std::string> candidate_indices = {"NDVI", "NDWI"};
  std::vector<std::string> feature_bands = {"Blue", "Green", "Red"};
  nn::Architecture arch;                              // svann_i and osfa
  std::map<std::string, nn::Architecture> arch_by_zone;  // svann_e only
  nn::TrainConfig train;
  std::size_t max_pixels = 4096;
  double init_lo = -0.5, init_hi = 0.5;
  bool use_bias = true;
  std::uint64_t seed = 0;
};

namespace detail {

inline nn::Architecture arch_for(const TrainSpec& spec, const std::string& zone_id,
                                 int feature_dim) {
  nn::Architecture arch = spec.mode == Mode::svann_e && spec.arch_by_zone.count(zone_id)
                              ? spec.arch_by_zone.at(zone_id)
                              : spec.arch;
  if (arch.layer_sizes.empty())
    arch = nn::make_architecture({feature_dim, 8, 1}, nn::Activation::sigmoid,
                                 nn::Activation::sigmoid);
  arch.layer_sizes.front() = feature_dim;
  arch.validate();
  return arch;
}

}  // namespace detail

/// Train the registry: one model per (zone, candidate index) in the SVANN
/// modes, or one pooled model over all zones and all candidate indices in
/// OSFA mode.
inline Registry train_zonal(const TrainSpec& spec, const TileSet<float>& tiles,
                            const ZoneAssignment& assignment) {
  Registry registry;
  registry.mode = spec.mode;

  if (spec.mode == Mode::osfa) {
    FeatureSpec features{spec.feature_bands, spec.candidate_indices};
    std::vector<std::size_t> pooled;
    for (const auto& [zone_id, idxs] : assignment.tiles_by_zone)
      pooled.insert(pooled.end(), idxs.begin(), idxs.end());
    nn::Dataset data = pixel_dataset(tiles, pooled, Split::train, features, spec.max_pixels,
                                     derive_seed(spec.seed, "zonal/osfa/data"));
    if (data.features.rows() == 0)
      throw std::invalid_argument("train_zonal: pooled training set is empty");
    nn::Architecture arch = detail::arch_for(spec, kOsfaZoneId, features.dim());
    nn::Network net = nn::init_network(arch, nn::InitScheme::uniform(spec.init_lo, spec.init_hi),
                                       derive_seed(spec.seed, "zonal/osfa/init"), spec.use_bias);
    nn::TrainConfig tc = spec.train;
    tc.seed = derive_seed(spec.seed, "zonal/osfa/train");
    registry.entries.push_back(
        {"osfa", kOsfaZoneId, features, nn::train(std::move(net), data, tc).net});
    registry.validate();
    return registry;
  }

  for (const auto& [zone_id, idxs] : assignment.tiles_by_zone) {
    for (const auto& index_id : spec.candidate_indices) {
      FeatureSpec features{spec.feature_bands, {index_id}};
      const std::string name = zone_id + "/" + index_id;
      nn::Dataset data = pixel_dataset(tiles, idxs, Split::train, features, spec.max_pixels,
                                       derive_seed(spec.seed, "zonal/" + name + "/data"));
      if (data.features.rows() == 0)
        throw std::invalid_argument("train_zonal: zone '" + zone_id +
                                    "' has an empty training set");
      nn::Architecture arch = detail::arch_for(spec, zone_id, features.dim());
      nn::Network net =
          nn::init_network(arch, nn::InitScheme::uniform(spec.init_lo, spec.init_hi),
                           derive_seed(spec.seed, "zonal/" + name + "/init"), spec.use_bias);
      nn::TrainConfig tc = spec.train;
      tc.seed = derive_seed(spec.seed, "zonal/" + name + "/train");
      registry.entries.push_back({name, zone_id, features, nn::train(std::move(net), data, tc).net});
    }
  }
  registry.validate();
  return registry;
}

// ---------------------------------------------------------------------------
// Evaluation, selection, comparison
// ---------------------------------------------------------------------------

struct MetricRow {
  std::string model;
  std::string zone;
  ConfusionMatrix cm;
  MetricSummary summary;
};

template <class Model>
ConfusionMatrix accumulate_confusion(const Model& model, const TileSet<float>& tiles,
                                     std::span<const std::size_t> tile_idx, Split split) {
  ConfusionMatrix cm;
  for (std::size_t ti : tile_idx) {
    if (!tiles.split.empty() && tiles.split[ti] != split) continue;
    cm += confusion(predict_mask(model, tiles.tiles[ti]), tiles.tiles[ti].mask);
  }
  return cm;
}

/// Metric rows for every (entry on its zone — or on every zone for pooled
/// entries) plus every rule model on every zone.
inline std::vector<MetricRow> evaluate(const Registry& registry,
                                       std::span<const RuleModel> rule_models,
                                       const TileSet<float>& tiles,
                                       const ZoneAssignment& assignment, Split split) {
  std::vector<MetricRow> rows;
  for (const auto& [zone_id, idxs] : assignment.tiles_by_zone) {
    for (const auto& entry : registry.entries) {
      if (entry.zone_id != zone_id && entry.zone_id != kOsfaZoneId) continue;
      ConfusionMatrix cm = accumulate_confusion(entry, tiles, idxs, split);
      rows.push_back({entry.name, zone_id, cm, summarize(cm)});
    }
    for (const auto& rule : rule_models) {
      ConfusionMatrix cm = accumulate_confusion(rule, tiles, idxs, split);
      rows.push_back({rule.name, zone_id, cm, summarize(cm)});
    }
  }
  return rows;
}

/// Generic per-zone argmax with listed-order tie-breaking. Keys are
/// (zone, candidate name, criterion value); first listed wins ties.
inline std::map<std::string, std::string> argmax_by_zone(
    std::span<const std::tuple<std::string, std::string, double>> scored) {
  std::map<std::string, std::string> best;
  std::map<std::string, double> best_value;
  for (const auto& [zone, name, value] : scored) {
    auto it = best_value.find(zone);
    if (it == best_value.end() || value > it->second) {
      best_value[zone] = value;
      best[zone] = name;
    }
  }
  return best;
}

/// Choose each zone's model by validation F1 (ties: first listed).
/// Returns zone id -> entry index into the registry.
inline std::map<std::string, std::size_t> select_best(const Registry& registry,
                                                      std::span<const MetricRow> validation) {
  std::vector<std::tuple<std::string, std::string, double>> scored;
  for (const auto& entry : registry.entries) {
    if (entry.zone_id == kOsfaZoneId) continue;
    for (const auto& row : validation)
      if (row.model == entry.name && row.zone == entry.zone_id)
        scored.emplace_back(entry.zone_id, entry.name, row.summary.f1);
  }
  const auto winners = argmax_by_zone(scored);
  std::map<std::string, std::size_t> out;
  for (const auto& [zone, name] : winners)
    for (std::size_t i = 0; i < registry.entries.size(); ++i)
      if (registry.entries[i].name == name) {
        out[zone] = i;
        break;
      }
  return out;
}

/// Fraction of mutually valid pixels on which the two masks agree.
/// Symmetric; 1.0 against itself; 0 when nothing overlaps.
inline double agreement_rate(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument("agreement_rate: mask dimensions differ");
  std::uint64_t valid = 0, equal = 0;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    if (a.values(i) == kMaskNodata || b.values(i) == kMaskNodata) continue;
    ++valid;
    if (a.values(i) == b.values(i)) ++equal;
  }
  return valid == 0 ? 0.0 : static_cast<double>(equal) / static_cast<double>(valid);
}

struct AgreementEntry {
  std::string black_box;
  std::string interpretable;
  std::string zone;
  double agreement = 0.0;
  double f1_gap = 0.0;
  int rank = 0;  // 1 = declared interpretation
};

struct ComparativeReport {
  std::vector<MetricRow> metrics;        // test metrics for all models
  std::vector<AgreementEntry> agreements;

  /// rank-1 interpretable model for (black_box, zone), if present
  std::optional<std::string> interpretation(const std::string& black_box,
                                            const std::string& zone) const {
    for (const auto& e : agreements)
      if (e.rank == 1 && e.black_box == black_box && e.zone == zone) return e.interpretable;
    return std::nullopt;
  }
};

/// Rank interpretable models against each trained model per zone: primary
/// key pixel agreement rate (desc), secondary |F1 gap| (asc), then listed
/// order. Deterministic for fixed data and seeds.
inline ComparativeReport compare_report(std::span<const Entry* const> black_box,
                                        std::span<const RuleModel> interpretable,
                                        const TileSet<float>& tiles,
                                        const ZoneAssignment& assignment, Split split) {
  ComparativeReport report;

  // test metrics for the F1 gaps
  std::map<std::pair<std::string, std::string>, double> f1;  // (model, zone) -> F1
  for (const auto& [zone_id, idxs] : assignment.tiles_by_zone) {
    for (const Entry* entry : black_box) {
      if (entry->zone_id != zone_id && entry->zone_id != kOsfaZoneId) continue;
      ConfusionMatrix cm = accumulate_confusion(*entry, tiles, idxs, split);
      MetricRow row{entry->name, zone_id, cm, summarize(cm)};
      f1[{row.model, zone_id}] = row.summary.f1;
      report.metrics.push_back(std::move(row));
    }
    for (const auto& rule : interpretable) {
      ConfusionMatrix cm = accumulate_confusion(rule, tiles, idxs, split);
      MetricRow row{rule.name, zone_id, cm, summarize(cm)};
      f1[{row.model, zone_id}] = row.summary.f1;
      report.metrics.push_back(std::move(row));
    }
  }

  for (const auto& [zone_id, idxs] : assignment.tiles_by_zone) {
    for (const Entry* entry : black_box) {
      if (entry->zone_id != zone_id && entry->zone_id != kOsfaZoneId) continue;
      std::vector<AgreementEntry> ranked;
      for (const auto& rule : interpretable) {
        // pooled agreement across the zone's test tiles
        std::uint64_t valid = 0, equal = 0;
        for (std::size_t ti : idxs) {
          if (!tiles.split.empty() && tiles.split[ti] != split) continue;
          const Mask ma = predict_mask(*entry, tiles.tiles[ti]);
          const Mask mb = predict_mask(rule, tiles.tiles[ti]);
          for (Eigen::Index i = 0; i < ma.values.size(); ++i) {
            if (ma.values(i) == kMaskNodata || mb.values(i) == kMaskNodata) continue;
            ++valid;
            if (ma.values(i) == mb.values(i)) ++equal;
          }
        }
        AgreementEntry e;
        e.black_box = entry->name;
        e.interpretable = rule.name;
        e.zone = zone_id;
        e.agreement = valid == 0 ? 0.0 : static_cast<double>(equal) / static_cast<double>(valid);
        e.f1_gap = std::abs(f1[{entry->name, zone_id}] - f1[{rule.name, zone_id}]);
        ranked.push_back(e);
      }
      // stable order: agreement desc, |F1 gap| asc, listed order otherwise
      std::vector<std::size_t> order(ranked.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ranked[a].agreement != ranked[b].agreement)
          return ranked[a].agreement > ranked[b].agreement;
        return ranked[a].f1_gap < ranked[b].f1_gap;
      });
      for (std::size_t pos = 0; pos < order.size(); ++pos)
        ranked[order[pos]].rank = static_cast<int>(pos) + 1;
      report.agreements.insert(report.agreements.end(), ranked.begin(), ranked.end());
    }
  }
  return report;
}

/// Human-readable summary naming each zone's rank-1 interpretation.
inline std::string interpretation_summary(const ComparativeReport& report) {
  std::ostringstream out;
  for (const auto& e : report.agreements)
    if (e.rank == 1)
      out << "zone " << e.zone << ": model " << e.black_box << " behaves most like "
          << e.interpretable << " (agreement " << e.agreement << ", F1 gap " << e.f1_gap
          << ")\n";
  return out.str();
}

}  // namespace svann::zonal
