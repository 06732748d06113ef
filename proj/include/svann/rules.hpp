// Rule-based classifiers over index bands: an ordered interval table maps
// index values to category labels, and a binary map collapses categories to
// wetland / non-wetland. These are the interpretable baseline models.
//
// Interval semantics are half-open [lo, hi) with the final interval closed
// at its upper bound, so touching boundaries in the published tables are
// unambiguous. The built-in rulesets:
//
//   ndvi_default                      ndwi_default
//     [-1.0, -0.1)  Water               [-1.0, -0.6)  Non-Wetland
//     [-0.1,  0.1)  Rocks/clouds/...    [-0.6,  1.0]  Wetland
//     [ 0.1,  0.73) Sparse Wetland Veg.
//     [ 0.73, 1.0]  Dense Non-Wetland Veg.
//
// Only "Sparse Wetland Vegetation" counts as wetland under ndvi_default;
// the mapping is configurable through the JSON schema.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "svann/indices.hpp"
#include "svann/raster.hpp"

namespace svann {

struct RuleInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::string label;
};

struct RuleSet {
  std::string index_id;
  std::vector<RuleInterval> intervals;               // ordered, cover [-1, 1]
  std::map<std::string, std::uint8_t> binary_map;    // label -> {0, 1}
};

/// Check ordering, coverage of [-1, 1], non-overlap, and binary-map
/// completeness. Throws listing every offending interval pair.
inline void validate_ruleset(const RuleSet& rules) {
  if (rules.intervals.empty())
    throw std::invalid_argument("ruleset has no intervals");
  std::string problems;
  for (std::size_t i = 0; i < rules.intervals.size(); ++i) {
    const auto& iv = rules.intervals[i];
    if (iv.lo >= iv.hi)
      problems += " interval " + std::to_string(i) + " has lo >= hi;";
    if (rules.binary_map.find(iv.label) == rules.binary_map.end())
      problems += " label '" + iv.label + "' missing from binary map;";
    if (i + 1 < rules.intervals.size()) {
      const auto& next = rules.intervals[i + 1];
      if (next.lo < iv.hi)
        problems += " intervals " + std::to_string(i) + " and " + std::to_string(i + 1) +
                    " overlap;";
      if (next.lo > iv.hi)
        problems += " gap between intervals " + std::to_string(i) + " and " +
                    std::to_string(i + 1) + ";";
    }
  }
  if (rules.intervals.front().lo != -1.0) problems += " coverage does not start at -1;";
  if (rules.intervals.back().hi != 1.0) problems += " coverage does not end at 1;";
  if (!problems.empty()) throw std::invalid_argument("invalid ruleset:" + problems);
}

enum class BuiltinRuleset { ndvi_default, ndwi_default };

inline RuleSet builtin_ruleset(BuiltinRuleset which) {
  RuleSet rules;
  if (which == BuiltinRuleset::ndvi_default) {
    rules.index_id = "NDVI";
    rules.intervals = {{-1.0, -0.1, "Water"},
                       {-0.1, 0.1, "Rocks/clouds/buildings"},
                       {0.1, 0.73, "Sparse Wetland Vegetation"},
                       {0.73, 1.0, "Dense Non-Wetland Vegetation"}};
    rules.binary_map = {{"Water", 0},
                        {"Rocks/clouds/buildings", 0},
                        {"Sparse Wetland Vegetation", 1},
                        {"Dense Non-Wetland Vegetation", 0}};
  } else {
    rules.index_id = "NDWI";
    rules.intervals = {{-1.0, -0.6, "Non-Wetland"}, {-0.6, 1.0, "Wetland"}};
    rules.binary_map = {{"Non-Wetland", 0}, {"Wetland", 1}};
  }
  return rules;
}

/// Category label for one index value (half-open lookup, last interval
/// closed). Values outside [-1, 1] indicate corrupted input.
inline const std::string& classify_value(const RuleSet& rules, double value) {
  if (value < -1.0 || value > 1.0)
    throw std::invalid_argument("index value " + std::to_string(value) + " outside [-1, 1]");
  for (std::size_t i = 0; i + 1 < rules.intervals.size(); ++i)
    if (value >= rules.intervals[i].lo && value < rules.intervals[i].hi)
      return rules.intervals[i].label;
  return rules.intervals.back().label;
}

inline std::uint8_t classify_binary(const RuleSet& rules, double value) {
  return rules.binary_map.at(classify_value(rules, value));
}

/// Per-pixel binary classification of an index band. Nodata pixels map to
/// 255.
template <class T>
Mask classify(const IndexBand<T>& band, const RuleSet& rules) {
  if (rules.index_id != band.index_id)
    throw std::invalid_argument("ruleset for " + rules.index_id +
                                " applied to index band " + band.index_id);
  Mask out(band.width(), band.height());
  for (Eigen::Index i = 0; i < band.values.size(); ++i) {
    out.values(i) = band.nodata(i) ? kMaskNodata
                                   : classify_binary(rules, static_cast<double>(band.values(i)));
  }
  return out;
}

// JSON schema:
// {"index":"NDVI","intervals":[{"lo":-1,"hi":-0.1,"label":"Water"},...],
//  "binary":{"Water":0,...}}

inline RuleSet ruleset_from_json(const nlohmann::json& doc) {
  RuleSet rules;
  rules.index_id = doc.at("index").get<std::string>();
  for (const auto& iv : doc.at("intervals"))
    rules.intervals.push_back({iv.at("lo").get<double>(), iv.at("hi").get<double>(),
                               iv.at("label").get<std::string>()});
  for (const auto& [label, v] : doc.at("binary").items())
    rules.binary_map[label] = v.get<std::uint8_t>();
  validate_ruleset(rules);
  return rules;
}

inline nlohmann::json ruleset_to_json(const RuleSet& rules) {
  nlohmann::json doc;
  doc["index"] = rules.index_id;
  auto intervals = nlohmann::json::array();
  for (const auto& iv : rules.intervals)
    intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"label", iv.label}});
  doc["intervals"] = intervals;
  doc["binary"] = rules.binary_map;
  return doc;
}

inline RuleSet load_ruleset(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open ruleset '" + path.string() + "'");
  nlohmann::json doc;
  f >> doc;
  return ruleset_from_json(doc);
}

inline void save_ruleset(const RuleSet& rules, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << ruleset_to_json(rules).dump(2) << "\n";
}

}  // namespace svann
