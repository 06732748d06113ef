// Core raster types and the preprocessing operations: crop, bilinear
// upsampling, tiling, polygon rasterization, and dataset splitting.
//
// A Raster is a stack of named single-band grids sharing one affine
// geotransform. Band grids are Eigen arrays templated on the scalar type:
// float matches the on-disk container, double is used where computations
// need the extra precision. All types are immutable values once built;
// operations are free functions returning new values.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svann/random.hpp"

namespace svann {

template <class T>
using Grid = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Gridf = Grid<float>;
using Gridd = Grid<double>;
using GridU8 = Grid<std::uint8_t>;

inline constexpr std::uint8_t kMaskNodata = 255;

/// Affine geotransform: pixel (row, col) covers the world rectangle
/// [origin_x + col*psx, origin_x + (col+1)*psx) x
/// [origin_y + row*psy, origin_y + (row+1)*psy).
struct Transform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size_x = 1.0;
  double pixel_size_y = 1.0;

  Eigen::Vector2d pixel_center(Eigen::Index row, Eigen::Index col) const {
    return {origin_x + (static_cast<double>(col) + 0.5) * pixel_size_x,
            origin_y + (static_cast<double>(row) + 0.5) * pixel_size_y};
  }
  bool operator==(const Transform&) const = default;
};

template <class T>
struct Band {
  std::string name;
  Grid<T> data;  // height x width, row-major
};

template <class T>
class Raster {
 public:
  Raster() = default;
  Raster(Eigen::Index width, Eigen::Index height, Transform transform,
         std::optional<double> nodata = std::nullopt)
      : width_(width), height_(height), transform_(transform), nodata_(nodata) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("raster dimensions must be positive");
    if (transform.pixel_size_x <= 0.0 || transform.pixel_size_y <= 0.0)
      throw std::invalid_argument("pixel sizes must be positive");
  }

  void add_band(std::string name, Grid<T> data) {
    if (data.rows() != height_ || data.cols() != width_)
      throw std::invalid_argument("band '" + name + "' dimensions do not match raster");
    if (has_band(name))
      throw std::invalid_argument("duplicate band name '" + name + "'");
    bands_.push_back({std::move(name), std::move(data)});
  }

  bool has_band(std::string_view name) const {
    for (const auto& b : bands_)
      if (b.name == name) return true;
    return false;
  }

  const Grid<T>& band(std::string_view name) const {
    for (const auto& b : bands_)
      if (b.name == name) return b.data;
    throw std::out_of_range("missing band '" + std::string(name) + "'");
  }

  Eigen::Index width() const { return width_; }
  Eigen::Index height() const { return height_; }
  Eigen::Index band_count() const { return static_cast<Eigen::Index>(bands_.size()); }
  std::span<const Band<T>> bands() const { return bands_; }
  const Transform& transform() const { return transform_; }
  const std::optional<double>& nodata() const { return nodata_; }

  /// World-coordinate extent covered by the pixel grid.
  Eigen::AlignedBox2d extent() const {
    Eigen::Vector2d lo(transform_.origin_x, transform_.origin_y);
    Eigen::Vector2d hi(transform_.origin_x + static_cast<double>(width_) * transform_.pixel_size_x,
                       transform_.origin_y + static_cast<double>(height_) * transform_.pixel_size_y);
    return {lo, hi};
  }

  template <class U>
  Raster<U> cast() const {
    Raster<U> out(width_, height_, transform_, nodata_);
    for (const auto& b : bands_) out.add_band(b.name, b.data.template cast<U>());
    return out;
  }

 private:
  Eigen::Index width_ = 0;
  Eigen::Index height_ = 0;
  Transform transform_;
  std::optional<double> nodata_;
  std::vector<Band<T>> bands_;
};

using Rasterf = Raster<float>;
using Rasterd = Raster<double>;

/// Binary wetland mask: 0 = non-wetland, 1 = wetland, 255 = nodata.
struct Mask {
  GridU8 values;

  Mask() = default;
  explicit Mask(GridU8 v) : values(std::move(v)) {}
  Mask(Eigen::Index width, Eigen::Index height, std::uint8_t fill = 0)
      : values(GridU8::Constant(height, width, fill)) {}

  Eigen::Index width() const { return values.cols(); }
  Eigen::Index height() const { return values.rows(); }
};

struct Polygon {
  std::vector<Eigen::Vector2d> exterior;
  std::vector<std::vector<Eigen::Vector2d>> holes;
  std::string label;
};

struct PolygonSet {
  std::vector<Polygon> polygons;
};

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

template <class T>
struct Tile {
  Eigen::Index row = 0;  // tile row index within the tiling grid
  Eigen::Index col = 0;
  Raster<T> raster;
  Mask mask;
};

template <class T>
struct TileSet {
  Eigen::Index tile_size = 0;
  std::vector<Tile<T>> tiles;
  std::vector<Split> split;  // parallel to tiles; empty until split_dataset
};

namespace detail {

/// Even-odd crossing test over one ring. Points exactly on an edge follow
/// the half-open crossing rule, which keeps shared borders unambiguous.
inline bool ring_crossings_odd(const std::vector<Eigen::Vector2d>& ring,
                               const Eigen::Vector2d& p) {
  bool odd = false;
  std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) odd = !odd;
    }
  }
  return odd;
}

inline std::size_t distinct_vertices(const std::vector<Eigen::Vector2d>& ring) {
  std::vector<Eigen::Vector2d> seen;
  for (const auto& v : ring) {
    bool dup = false;
    for (const auto& s : seen)
      if (s == v) { dup = true; break; }
    if (!dup) seen.push_back(v);
  }
  return seen.size();
}

}  // namespace detail

/// Point-in-polygon under the even-odd rule; holes subtract.
inline bool polygon_contains(const Polygon& poly, const Eigen::Vector2d& p) {
  bool inside = detail::ring_crossings_odd(poly.exterior, p);
  for (const auto& hole : poly.holes)
    if (detail::ring_crossings_odd(hole, p)) inside = !inside;
  return inside;
}

/// Crop to the pixels whose footprint intersects `bbox`. Values are copied,
/// never resampled; the output origin snaps to the first kept pixel edge.
template <class T>
Raster<T> crop(const Raster<T>& in, const Eigen::AlignedBox2d& bbox) {
  const Transform& t = in.transform();
  auto first_index = [](double lo, double origin, double ps) {
    return static_cast<Eigen::Index>(std::floor((lo - origin) / ps));
  };
  auto last_index = [](double hi, double origin, double ps) {
    return static_cast<Eigen::Index>(std::ceil((hi - origin) / ps)) - 1;
  };
  Eigen::Index c0 = std::max<Eigen::Index>(0, first_index(bbox.min().x(), t.origin_x, t.pixel_size_x));
  Eigen::Index c1 = std::min<Eigen::Index>(in.width() - 1, last_index(bbox.max().x(), t.origin_x, t.pixel_size_x));
  Eigen::Index r0 = std::max<Eigen::Index>(0, first_index(bbox.min().y(), t.origin_y, t.pixel_size_y));
  Eigen::Index r1 = std::min<Eigen::Index>(in.height() - 1, last_index(bbox.max().y(), t.origin_y, t.pixel_size_y));
  if (c0 > c1 || r0 > r1)
    throw std::invalid_argument("crop: bbox does not intersect raster extent");

  Transform out_t = t;
  out_t.origin_x = t.origin_x + static_cast<double>(c0) * t.pixel_size_x;
  out_t.origin_y = t.origin_y + static_cast<double>(r0) * t.pixel_size_y;
  Raster<T> out(c1 - c0 + 1, r1 - r0 + 1, out_t, in.nodata());
  for (const auto& b : in.bands())
    out.add_band(b.name, b.data.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1));
  return out;
}

/// Bilinear upsampling by an integer factor under the pixel-center
/// convention: output index i samples input coordinate (i + 0.5)/factor - 0.5,
/// clamped at the borders. Constant bands stay constant and no output value
/// leaves the input [min, max] range.
template <class T>
Raster<T> bilinear_upsample(const Raster<T>& in, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
  Transform t = in.transform();
  t.pixel_size_x /= factor;
  t.pixel_size_y /= factor;
  const Eigen::Index w_out = in.width() * factor;
  const Eigen::Index h_out = in.height() * factor;
  Raster<T> out(w_out, h_out, t, in.nodata());

  // Per-axis sample positions are shared by every band.
  std::vector<Eigen::Index> i0x(w_out), i1x(w_out);
  std::vector<double> fx(w_out);
  for (Eigen::Index i = 0; i < w_out; ++i) {
    double s = (static_cast<double>(i) + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in.width() - 1));
    i0x[i] = static_cast<Eigen::Index>(std::floor(s));
    i1x[i] = std::min(i0x[i] + 1, in.width() - 1);
    fx[i] = s - static_cast<double>(i0x[i]);
  }
  std::vector<Eigen::Index> i0y(h_out), i1y(h_out);
  std::vector<double> fy(h_out);
  for (Eigen::Index j = 0; j < h_out; ++j) {
    double s = (static_cast<double>(j) + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in.height() - 1));
    i0y[j] = static_cast<Eigen::Index>(std::floor(s));
    i1y[j] = std::min(i0y[j] + 1, in.height() - 1);
    fy[j] = s - static_cast<double>(i0y[j]);
  }

  for (const auto& b : in.bands()) {
    Grid<T> g(h_out, w_out);
    for (Eigen::Index r = 0; r < h_out; ++r) {
      const double wy = fy[r];
      for (Eigen::Index c = 0; c < w_out; ++c) {
        const double wx = fx[c];
        const double v00 = static_cast<double>(b.data(i0y[r], i0x[c]));
        const double v01 = static_cast<double>(b.data(i0y[r], i1x[c]));
        const double v10 = static_cast<double>(b.data(i1y[r], i0x[c]));
        const double v11 = static_cast<double>(b.data(i1y[r], i1x[c]));
        const double top = v00 + (v01 - v00) * wx;
        const double bot = v10 + (v11 - v10) * wx;
        g(r, c) = static_cast<T>(top + (bot - top) * wy);
      }
    }
    out.add_band(b.name, std::move(g));
  }
  return out;
}

/// Tiling grid dimensions (rows, cols). With drop_partial the right/bottom
/// remainder is discarded; otherwise partial tiles are padded to full size.
inline std::pair<Eigen::Index, Eigen::Index> tile_grid_shape(Eigen::Index width,
                                                             Eigen::Index height,
                                                             Eigen::Index tile_size,
                                                             bool drop_partial) {
  if (tile_size < 1) throw std::invalid_argument("tile_size must be >= 1");
  if (drop_partial) return {height / tile_size, width / tile_size};
  return {(height + tile_size - 1) / tile_size, (width + tile_size - 1) / tile_size};
}

/// Cut the raster and its mask into tile_size x tile_size tiles. Partial
/// edge tiles are either dropped or padded (raster: nodata sentinel if set,
/// else 0; mask: 255).
template <class T>
TileSet<T> tile(const Raster<T>& raster, const Mask& mask, Eigen::Index tile_size,
                bool drop_partial) {
  if (mask.width() != raster.width() || mask.height() != raster.height())
    throw std::invalid_argument("tile: mask dimensions do not match raster");
  auto [rows, cols] = tile_grid_shape(raster.width(), raster.height(), tile_size, drop_partial);

  TileSet<T> out;
  out.tile_size = tile_size;
  out.tiles.reserve(static_cast<std::size_t>(rows * cols));
  const T pad_value = static_cast<T>(raster.nodata().value_or(0.0));
  for (Eigen::Index tr = 0; tr < rows; ++tr) {
    for (Eigen::Index tc = 0; tc < cols; ++tc) {
      const Eigen::Index r0 = tr * tile_size;
      const Eigen::Index c0 = tc * tile_size;
      const Eigen::Index h = std::min(tile_size, raster.height() - r0);
      const Eigen::Index w = std::min(tile_size, raster.width() - c0);

      Transform t = raster.transform();
      t.origin_x += static_cast<double>(c0) * t.pixel_size_x;
      t.origin_y += static_cast<double>(r0) * t.pixel_size_y;

      Raster<T> frag(tile_size, tile_size, t, raster.nodata());
      for (const auto& b : raster.bands()) {
        Grid<T> g = Grid<T>::Constant(tile_size, tile_size, pad_value);
        g.block(0, 0, h, w) = b.data.block(r0, c0, h, w);
        frag.add_band(b.name, std::move(g));
      }
      Mask m(tile_size, tile_size, kMaskNodata);
      m.values.block(0, 0, h, w) = mask.values.block(r0, c0, h, w);
      out.tiles.push_back({tr, tc, std::move(frag), std::move(m)});
    }
  }
  return out;
}

/// Rasterize polygons onto a pixel grid: a pixel is 1 iff its center lies
/// inside any polygon under the even-odd rule (holes subtract).
inline Mask rasterize_polygons(const PolygonSet& polygons, Eigen::Index width,
                               Eigen::Index height, const Transform& transform) {
  for (std::size_t i = 0; i < polygons.polygons.size(); ++i) {
    const auto& poly = polygons.polygons[i];
    if (detail::distinct_vertices(poly.exterior) < 3)
      throw std::invalid_argument("rasterize_polygons: degenerate exterior ring in polygon " +
                                  std::to_string(i));
    for (const auto& hole : poly.holes)
      if (detail::distinct_vertices(hole) < 3)
        throw std::invalid_argument("rasterize_polygons: degenerate hole ring in polygon " +
                                    std::to_string(i));
  }
  Mask out(width, height, 0);
  for (Eigen::Index r = 0; r < height; ++r) {
    for (Eigen::Index c = 0; c < width; ++c) {
      const Eigen::Vector2d p = transform.pixel_center(r, c);
      for (const auto& poly : polygons.polygons) {
        if (polygon_contains(poly, p)) {
          out.values(r, c) = 1;
          break;
        }
      }
    }
  }
  return out;
}

/// Nearest-neighbor (block replication) upsampling for label masks, where
/// interpolation would invent classes.
inline Mask upsample_mask_nearest(const Mask& in, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
  Mask out(in.width() * factor, in.height() * factor);
  for (Eigen::Index r = 0; r < out.height(); ++r)
    for (Eigen::Index c = 0; c < out.width(); ++c)
      out.values(r, c) = in.values(r / factor, c / factor);
  return out;
}

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Assign tiles to train/val/test with a seeded Fisher-Yates shuffle.
/// val and test get floor(fraction * N) tiles each; the remainder goes to
/// train. Fewer than 3 tiles -> everything goes to train (with a warning).
template <class T>
TileSet<T> split_dataset(TileSet<T> tiles, const SplitFractions& fractions,
                         std::uint64_t seed) {
  if (fractions.train <= 0 || fractions.val <= 0 || fractions.test <= 0)
    throw std::invalid_argument("split fractions must be positive");
  if (std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");

  const std::size_t n = tiles.tiles.size();
  tiles.split.assign(n, Split::train);
  if (n < 3) {
    if (n > 0)
      std::cerr << "split_dataset: only " << n << " tiles; assigning all to train\n";
    return tiles;
  }
  const auto n_val = static_cast<std::size_t>(std::floor(fractions.val * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  shuffle(order, rng);

  std::size_t k = 0;
  for (std::size_t i = 0; i < n_val; ++i) tiles.split[order[k++]] = Split::val;
  for (std::size_t i = 0; i < n_test; ++i) tiles.split[order[k++]] = Split::test;
  // remaining tiles (floor(train*N) plus any remainder) stay train
  return tiles;
}

}  // namespace svann
