#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "svann/indices.hpp"
#include "svann/random.hpp"

using namespace svann;

namespace {

Gridd random_band(Eigen::Index w, Eigen::Index h, SplitMix64& rng, double lo = 0.01,
                  double hi = 1.0) {
  Gridd g(h, w);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.next_double(lo, hi);
  return g;
}

}  // namespace

TEST_CASE("normalized difference basics") {
  Gridd a = Gridd::Constant(2, 2, 0.6);
  Gridd b = Gridd::Constant(2, 2, 0.2);
  const auto band = normalized_difference(a, b);
  CHECK(band.values(0, 0) == doctest::Approx(0.5));
  CHECK((band.nodata == 0).all());

  const auto same = normalized_difference(a, a);
  CHECK((same.values == 0.0).all());

  Gridd z = Gridd::Zero(2, 2);
  const auto degenerate = normalized_difference(z, z);
  CHECK((degenerate.values == 0.0).all());
  CHECK((degenerate.nodata == 1).all());

  CHECK_THROWS(normalized_difference(Gridd::Zero(2, 2), Gridd::Zero(3, 2)));
}

TEST_CASE("compute_index dispatches with the right band order") {
  Raster<double> r(1, 1, Transform{});
  r.add_band("NIR", Gridd::Constant(1, 1, 0.5));
  r.add_band("Red", Gridd::Constant(1, 1, 0.1));
  r.add_band("Green", Gridd::Constant(1, 1, 0.4));

  const auto ndvi = compute_index(r, "NDVI");
  CHECK(ndvi.values(0, 0) == doctest::Approx(0.4 / 0.6));
  CHECK(ndvi.index_id == "NDVI");

  // Green=0.4, NIR=0.5 here; positive NDWI only when Green > NIR
  const auto ndwi = compute_index(r, "NDWI");
  CHECK(ndwi.values(0, 0) == doctest::Approx(-0.1 / 0.9));

  Raster<double> water(1, 1, Transform{});
  water.add_band("Green", Gridd::Constant(1, 1, 0.4));
  water.add_band("NIR", Gridd::Constant(1, 1, 0.1));
  CHECK(compute_index(water, "NDWI").values(0, 0) == doctest::Approx(0.6));

  CHECK_THROWS_WITH(compute_index(water, "NDVI"), doctest::Contains("Red"));
  CHECK_THROWS_WITH(compute_index(water, "XYZ"), doctest::Contains("unknown index"));
}

TEST_CASE("green equals nir gives zero ndwi") {
  Raster<double> r(3, 3, Transform{});
  r.add_band("Green", Gridd::Constant(3, 3, 0.33));
  r.add_band("NIR", Gridd::Constant(3, 3, 0.33));
  CHECK((compute_index(r, "NDWI").values == 0.0).all());
}

TEST_CASE("nodata sentinel pixels are flagged") {
  Raster<double> r(2, 1, Transform{}, -999.0);
  Gridd nir(1, 2), red(1, 2);
  nir << 0.5, -999.0;
  red << 0.1, 0.2;
  r.add_band("NIR", nir);
  r.add_band("Red", red);
  const auto band = compute_index(r, "NDVI");
  CHECK(band.nodata(0, 0) == 0);
  CHECK(band.nodata(0, 1) == 1);
  CHECK(band.values(0, 1) == 0.0);
}

TEST_CASE("index properties") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Gridd a = random_band(6, 5, rng);
    const Gridd b = random_band(6, 5, rng);
    const auto ab = normalized_difference(a, b);
    const auto ba = normalized_difference(b, a);

    // antisymmetry
    CHECK(((ab.values + ba.values).abs() < 1e-15).all());
    // bounded for non-negative inputs
    CHECK((ab.values.abs() <= 1.0 + 1e-15).all());
    // scale invariance
    const double c = rng.next_double(0.05, 20.0);
    const auto scaled = normalized_difference(Gridd(a * c), Gridd(b * c));
    CHECK(((ab.values - scaled.values).abs() < 1e-12).all());
  }
}

TEST_CASE("registry is extensible") {
  IndexRegistry registry = builtin_indices();
  registry["NDSI"] = {"Green", "SWIR1"};
  Raster<double> r(1, 1, Transform{});
  r.add_band("Green", Gridd::Constant(1, 1, 0.8));
  r.add_band("SWIR1", Gridd::Constant(1, 1, 0.2));
  CHECK(compute_index(r, "NDSI", registry).values(0, 0) == doctest::Approx(0.6));
  CHECK(builtin_indices().count("NDMI") == 1);
}

TEST_CASE("index band raster container round trip") {
  Raster<float> r(2, 1, Transform{});
  Gridf nir(1, 2), red(1, 2);
  nir << 0.5f, 0.0f;
  red << 0.1f, 0.0f;
  r.add_band("NIR", nir);
  r.add_band("Red", red);
  const auto band = compute_index(r, "NDVI");
  const Raster<float> packed = index_band_to_raster(band, r.transform());
  CHECK(packed.band_count() == 1);
  CHECK(packed.bands()[0].name == "NDVI");
  CHECK(packed.band("NDVI")(0, 1) == kIndexNodataSentinel);
  CHECK(packed.nodata() == static_cast<double>(kIndexNodataSentinel));
}
