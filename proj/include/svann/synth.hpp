// Synthetic scene generator: a desk-scale stand-in for satellite imagery
// plus wetland ground truth. Each zone rectangle carries a generating rule;
// the truth mask inside a zone is that rule applied to the zone's pixels
// (computed through the same index path the classifiers use, so a zero-noise
// zone is perfectly recoverable by its own rule), with labels flipped
// independently at the zone's noise probability. Pixels outside every zone
// are nodata in the mask.

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "svann/indices.hpp"
#include "svann/random.hpp"
#include "svann/raster.hpp"
#include "svann/rules.hpp"

namespace svann {

struct SceneZone {
  std::string id;
  Eigen::AlignedBox2d rect;  // world coordinates
  RuleSet generating_rule;
  double noise = 0.0;  // label flip probability in [0, 1)
};

struct SceneSpec {
  Eigen::Index width = 96;
  Eigen::Index height = 96;
  Transform transform;
  std::vector<SceneZone> zones;
  double reflectance_lo = 0.02;  // keeps index denominators away from zero
  double reflectance_hi = 0.98;
};

struct SyntheticScene {
  Raster<float> raster;   // bands Blue, Green, Red, NIR
  PolygonSet polygons;    // zone rectangles, labelled by zone id
  Mask mask;              // rule-generated truth; 255 outside all zones
};

inline Polygon box_polygon(const Eigen::AlignedBox2d& box, std::string label) {
  Polygon poly;
  poly.exterior = {{box.min().x(), box.min().y()},
                   {box.max().x(), box.min().y()},
                   {box.max().x(), box.max().y()},
                   {box.min().x(), box.max().y()}};
  poly.label = std::move(label);
  return poly;
}

inline SyntheticScene generate_synthetic_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.zones.empty())
    throw std::invalid_argument("generate_synthetic_scene: spec needs >= 1 zone");
  for (const auto& zone : spec.zones) {
    if (zone.noise < 0.0 || zone.noise >= 1.0)
      throw std::invalid_argument("zone '" + zone.id + "': noise must be in [0, 1)");
    validate_ruleset(zone.generating_rule);
  }
  for (std::size_t i = 0; i < spec.zones.size(); ++i)
    for (std::size_t j = i + 1; j < spec.zones.size(); ++j) {
      Eigen::AlignedBox2d overlap = spec.zones[i].rect.intersection(spec.zones[j].rect);
      if (!overlap.isEmpty() && overlap.volume() > 0.0)
        throw std::invalid_argument("zones '" + spec.zones[i].id + "' and '" +
                                    spec.zones[j].id + "' overlap");
    }

  SyntheticScene scene;
  scene.raster = Raster<float>(spec.width, spec.height, spec.transform);

  // Fixed draw order: five uniforms per pixel, row-major (four reflectances
  // plus the noise draw), so the scene depends only on (spec, seed).
  SplitMix64 rng(derive_seed(seed, "synth/scene"));
  const char* band_names[4] = {"Blue", "Green", "Red", "NIR"};
  std::array<Gridf, 4> bands;
  for (auto& g : bands) g.resize(spec.height, spec.width);
  Gridd noise_draw(spec.height, spec.width);
  for (Eigen::Index r = 0; r < spec.height; ++r)
    for (Eigen::Index c = 0; c < spec.width; ++c) {
      for (auto& g : bands)
        g(r, c) = static_cast<float>(rng.next_double(spec.reflectance_lo, spec.reflectance_hi));
      noise_draw(r, c) = rng.next_double();
    }
  for (int b = 0; b < 4; ++b) scene.raster.add_band(band_names[b], std::move(bands[static_cast<std::size_t>(b)]));

  // Labels go through compute_index so they match the rule classifiers'
  // arithmetic exactly.
  std::map<std::string, IndexBand<float>> index_cache;
  for (const auto& zone : spec.zones)
    if (!index_cache.count(zone.generating_rule.index_id))
      index_cache.emplace(zone.generating_rule.index_id,
                          compute_index(scene.raster, zone.generating_rule.index_id));

  scene.mask = Mask(spec.width, spec.height, kMaskNodata);
  for (Eigen::Index r = 0; r < spec.height; ++r)
    for (Eigen::Index c = 0; c < spec.width; ++c) {
      const Eigen::Vector2d center = spec.transform.pixel_center(r, c);
      for (const auto& zone : spec.zones) {
        if (!zone.rect.contains(center)) continue;
        const IndexBand<float>& band = index_cache.at(zone.generating_rule.index_id);
        if (band.nodata(r, c)) break;
        std::uint8_t label =
            classify_binary(zone.generating_rule, static_cast<double>(band.values(r, c)));
        if (noise_draw(r, c) < zone.noise) label = static_cast<std::uint8_t>(1 - label);
        scene.mask.values(r, c) = label;
        break;
      }
    }

  for (const auto& zone : spec.zones)
    scene.polygons.polygons.push_back(box_polygon(zone.rect, zone.id));
  return scene;
}

}  // namespace svann
