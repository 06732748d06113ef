// Normalized-difference remote sensing indices computed from raster bands.
//
// NDVI = (NIR - Red) / (NIR + Red)     vegetation density
// NDWI = (Green - NIR) / (Green + NIR) water content (positive over water)
//
// The registry maps an index id to its (a, b) band pair so further indices
// are one entry away. Zero-denominator pixels yield value 0 with the nodata
// flag set instead of NaN, so rule classification and metrics can skip them
// deterministically.

#pragma once

#include <map>
#include <string>

#include "svann/raster.hpp"

namespace svann {

template <class T>
struct IndexBand {
  std::string index_id;
  Grid<T> values;   // in [-1, 1] wherever nodata is 0
  GridU8 nodata;    // 1 = undefined pixel

  Eigen::Index width() const { return values.cols(); }
  Eigen::Index height() const { return values.rows(); }
};

/// (a - b) / (a + b) per pixel over two band expressions of equal shape.
template <class DerivedA, class DerivedB>
auto normalized_difference(const Eigen::ArrayBase<DerivedA>& a,
                           const Eigen::ArrayBase<DerivedB>& b,
                           std::string index_id = "ND")
    -> IndexBand<typename DerivedA::Scalar> {
  using T = typename DerivedA::Scalar;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("normalized_difference: band dimensions differ");
  IndexBand<T> out;
  out.index_id = std::move(index_id);
  Grid<T> sum = a + b;
  out.nodata = (sum == T(0)).template cast<std::uint8_t>();
  out.values = (sum == T(0)).select(Grid<T>::Zero(a.rows(), a.cols()), (a - b) / sum);
  return out;
}

struct IndexDef {
  std::string band_a;
  std::string band_b;
};

using IndexRegistry = std::map<std::string, IndexDef>;

inline const IndexRegistry& builtin_indices() {
  static const IndexRegistry registry = {
      {"NDVI", {"NIR", "Red"}},
      {"NDWI", {"Green", "NIR"}},
      {"NDMI", {"NIR", "SWIR1"}},
  };
  return registry;
}

/// Sentinel used when an index band travels through the raster container.
inline constexpr float kIndexNodataSentinel = -999.0f;

/// Pack an index band into a single-band raster (band named by index_id,
/// nodata pixels as the container's sentinel) for SVR1 serialization.
inline Raster<float> index_band_to_raster(const IndexBand<float>& band,
                                          const Transform& transform) {
  Raster<float> out(band.width(), band.height(), transform,
                    static_cast<double>(kIndexNodataSentinel));
  Gridf values = band.values;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (band.nodata(i)) values(i) = kIndexNodataSentinel;
  out.add_band(band.index_id, std::move(values));
  return out;
}

/// Inverse of index_band_to_raster.
inline IndexBand<float> index_band_from_raster(const Raster<float>& raster) {
  if (raster.band_count() != 1)
    throw std::invalid_argument("index band container must have exactly one band");
  IndexBand<float> out;
  out.index_id = raster.bands()[0].name;
  out.values = raster.bands()[0].data;
  const float sentinel =
      static_cast<float>(raster.nodata().value_or(kIndexNodataSentinel));
  out.nodata = (out.values == sentinel).cast<std::uint8_t>();
  for (Eigen::Index i = 0; i < out.values.size(); ++i)
    if (out.nodata(i)) out.values(i) = 0.0f;
  return out;
}

/// Look up the index definition and dispatch to normalized_difference with
/// the right band order. Pixels equal to the raster nodata sentinel are
/// flagged in the output.
template <class T>
IndexBand<T> compute_index(const Raster<T>& raster, const std::string& index_id,
                           const IndexRegistry& registry = builtin_indices()) {
  auto it = registry.find(index_id);
  if (it == registry.end())
    throw std::invalid_argument("unknown index '" + index_id + "'");
  const IndexDef& def = it->second;
  for (const auto& name : {def.band_a, def.band_b})
    if (!raster.has_band(name))
      throw std::invalid_argument("index " + index_id + ": raster is missing band '" + name + "'");

  IndexBand<T> out = normalized_difference(raster.band(def.band_a), raster.band(def.band_b),
                                           index_id);
  if (raster.nodata()) {
    const T sentinel = static_cast<T>(*raster.nodata());
    GridU8 bad = ((raster.band(def.band_a) == sentinel) || (raster.band(def.band_b) == sentinel))
                     .template cast<std::uint8_t>();
    out.nodata = (out.nodata.max)(bad);
    out.values = (bad == std::uint8_t(1))
                     .select(Grid<T>::Zero(out.values.rows(), out.values.cols()), out.values);
  }
  return out;
}

}  // namespace svann
