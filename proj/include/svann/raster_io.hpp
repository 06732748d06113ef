// SVR1 raster container and GeoJSON polygon I/O.
//
// SVR1 layout:
//   bytes 0..8    magic "SVRASTER\n"
//   bytes 9..12   header byte length, unsigned 32-bit little-endian
//   header        UTF-8 JSON: {"width","height","bands":[names],
//                 "transform":[origin_x,origin_y,psx,psy],"nodata":null|number}
//   payload       one block per band in declared order, each
//                 width*height IEEE-754 binary32 little-endian, row-major
//
// write(read(f)) reproduces f's band payload bit for bit. Masks reuse the
// container with a single band of values {0,1,255}.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svann/raster.hpp"

namespace svann {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kRasterMagic[] = "SVRASTER\n";
inline constexpr std::size_t kRasterMagicLen = 9;

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "SVR1 I/O assumes a little-endian host");

inline void put_u32_le(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

/// Replace `path` atomically: write a sibling temp file, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open '" + tmp.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace detail

inline std::string serialize_raster(const Raster<float>& raster) {
  nlohmann::json header;
  header["width"] = raster.width();
  header["height"] = raster.height();
  auto names = nlohmann::json::array();
  for (const auto& b : raster.bands()) names.push_back(b.name);
  header["bands"] = names;
  const Transform& t = raster.transform();
  header["transform"] = {t.origin_x, t.origin_y, t.pixel_size_x, t.pixel_size_y};
  if (raster.nodata())
    header["nodata"] = *raster.nodata();
  else
    header["nodata"] = nullptr;

  std::string header_bytes = header.dump();
  std::string out;
  const std::size_t pixels = static_cast<std::size_t>(raster.width()) *
                             static_cast<std::size_t>(raster.height());
  out.reserve(kRasterMagicLen + 4 + header_bytes.size() +
              pixels * 4 * static_cast<std::size_t>(raster.band_count()));
  out.append(kRasterMagic, kRasterMagicLen);
  detail::put_u32_le(out, static_cast<std::uint32_t>(header_bytes.size()));
  out += header_bytes;
  for (const auto& b : raster.bands()) {
    // Row-major Eigen storage matches the payload layout directly.
    out.append(reinterpret_cast<const char*>(b.data.data()), pixels * 4);
  }
  return out;
}

inline Raster<float> deserialize_raster(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kRasterMagicLen || std::memcmp(bytes.data(), kRasterMagic, kRasterMagicLen) != 0)
    throw io_error("bad magic in '" + origin + "'");
  if (bytes.size() < kRasterMagicLen + 4)
    throw io_error("truncated header in '" + origin + "'");
  std::uint32_t header_len;
  std::memcpy(&header_len, bytes.data() + kRasterMagicLen, 4);
  const std::size_t header_off = kRasterMagicLen + 4;
  if (bytes.size() < header_off + header_len)
    throw io_error("truncated header in '" + origin + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(header_off, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed header in '" + origin + "': " + e.what());
  }

  const auto width = header.at("width").get<Eigen::Index>();
  const auto height = header.at("height").get<Eigen::Index>();
  const auto names = header.at("bands").get<std::vector<std::string>>();
  const auto tr = header.at("transform").get<std::vector<double>>();
  if (tr.size() != 4) throw io_error("malformed transform in '" + origin + "'");
  std::optional<double> nodata;
  if (!header.at("nodata").is_null()) nodata = header.at("nodata").get<double>();

  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t expected = pixels * 4 * names.size();
  const std::size_t payload = bytes.size() - header_off - header_len;
  if (payload < expected)
    throw io_error("truncated payload in '" + origin + "' (" + std::to_string(payload) +
                   " of " + std::to_string(expected) + " bytes)");
  if (payload > expected)
    throw io_error("header/payload length mismatch in '" + origin + "' (" +
                   std::to_string(payload) + " bytes for " + std::to_string(expected) +
                   " expected)");

  Raster<float> out(width, height, Transform{tr[0], tr[1], tr[2], tr[3]}, nodata);
  std::size_t off = header_off + header_len;
  for (const auto& name : names) {
    Grid<float> g(height, width);
    std::memcpy(g.data(), bytes.data() + off, pixels * 4);
    off += pixels * 4;
    out.add_band(name, std::move(g));
  }
  return out;
}

inline void write_raster(const Raster<float>& raster, const std::filesystem::path& path) {
  detail::write_file_atomic(path, serialize_raster(raster));
}

inline Raster<float> read_raster(const std::filesystem::path& path) {
  return deserialize_raster(detail::read_file(path), path.string());
}

/// Masks travel in the same container as a single band named "mask".
inline void write_mask(const Mask& mask, const Transform& transform,
                       const std::filesystem::path& path) {
  Raster<float> r(mask.width(), mask.height(), transform,
                  static_cast<double>(kMaskNodata));
  r.add_band("mask", mask.values.cast<float>());
  write_raster(r, path);
}

inline std::pair<Mask, Transform> read_mask(const std::filesystem::path& path) {
  Raster<float> r = read_raster(path);
  if (r.band_count() != 1)
    throw io_error("mask file '" + path.string() + "' must have exactly one band");
  const Grid<float>& g = r.bands()[0].data;
  Mask m(r.width(), r.height());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const float v = g(i);
    if (v != 0.0f && v != 1.0f && v != 255.0f)
      throw io_error("mask file '" + path.string() + "' contains value outside {0,1,255}");
    m.values(i) = static_cast<std::uint8_t>(v);
  }
  return {std::move(m), r.transform()};
}

// ---------------------------------------------------------------------------
// GeoJSON polygons: FeatureCollection of Polygon/MultiPolygon features with a
// "label" property. Ring orientation is not enforced; the first ring is the
// exterior and the rest are holes, per the GeoJSON convention.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Eigen::Vector2d> parse_ring(const nlohmann::json& ring) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& pt : ring) out.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
  // normalize closure: drop a duplicated final vertex
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

inline Polygon parse_polygon_coords(const nlohmann::json& rings, const std::string& label) {
  Polygon poly;
  poly.label = label;
  poly.exterior = parse_ring(rings.at(0));
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i]));
  return poly;
}

inline nlohmann::json ring_json(const std::vector<Eigen::Vector2d>& ring) {
  auto arr = nlohmann::json::array();
  for (const auto& v : ring) arr.push_back({v.x(), v.y()});
  if (!ring.empty()) arr.push_back({ring.front().x(), ring.front().y()});  // close
  return arr;
}

}  // namespace detail

inline PolygonSet parse_polygons(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed GeoJSON in '" + origin + "': " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection")
    throw io_error("'" + origin + "' is not a GeoJSON FeatureCollection");
  PolygonSet out;
  for (const auto& feature : doc.at("features")) {
    std::string label;
    if (feature.contains("properties") && feature["properties"].is_object())
      label = feature["properties"].value("label", "");
    const auto& geom = feature.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    if (type == "Polygon") {
      out.polygons.push_back(detail::parse_polygon_coords(geom.at("coordinates"), label));
    } else if (type == "MultiPolygon") {
      for (const auto& rings : geom.at("coordinates"))
        out.polygons.push_back(detail::parse_polygon_coords(rings, label));
    } else {
      throw io_error("unsupported geometry type '" + type + "' in '" + origin + "'");
    }
  }
  return out;
}

inline PolygonSet read_polygons(const std::filesystem::path& path) {
  return parse_polygons(detail::read_file(path), path.string());
}

inline std::string serialize_polygons(const PolygonSet& polygons) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& poly : polygons.polygons) {
    nlohmann::json rings = nlohmann::json::array();
    rings.push_back(detail::ring_json(poly.exterior));
    for (const auto& hole : poly.holes) rings.push_back(detail::ring_json(hole));
    features.push_back({{"type", "Feature"},
                        {"properties", {{"label", poly.label}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
  }
  nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(2);
}

inline void write_polygons(const PolygonSet& polygons, const std::filesystem::path& path) {
  detail::write_file_atomic(path, serialize_polygons(polygons));
}

}  // namespace svann
