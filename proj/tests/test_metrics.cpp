#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "svann/metrics.hpp"
#include "svann/random.hpp"

using namespace svann;

namespace {

Mask mask_of(std::initializer_list<std::uint8_t> values, Eigen::Index w, Eigen::Index h) {
  Mask m(w, h);
  Eigen::Index i = 0;
  for (std::uint8_t v : values) m.values(i++) = v;
  return m;
}

}  // namespace

TEST_CASE("confusion counting") {
  SUBCASE("perfect prediction") {
    const Mask ones = mask_of({1, 1, 1, 1}, 2, 2);
    const ConfusionMatrix cm = confusion(ones, ones);
    CHECK(cm.tp == 4);
    CHECK(cm.tn + cm.fp + cm.fn == 0);
  }
  SUBCASE("complement prediction") {
    const Mask pred = mask_of({0, 1, 0, 1}, 2, 2);
    const Mask truth = mask_of({1, 0, 1, 0}, 2, 2);
    const ConfusionMatrix cm = confusion(pred, truth);
    CHECK(cm.tp == 0);
    CHECK(cm.tn == 0);
    CHECK(cm.fp == 2);
    CHECK(cm.fn == 2);
  }
  SUBCASE("hand-enumerated 2x2 case") {
    const ConfusionMatrix cm =
        confusion(mask_of({1, 1, 0, 0}, 2, 2), mask_of({1, 0, 1, 0}, 2, 2));
    CHECK(cm.tp == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.fn == 1);
    CHECK(cm.tn == 1);
  }
  SUBCASE("nodata pixels excluded on either side") {
    const ConfusionMatrix cm =
        confusion(mask_of({1, 255, 0, 0}, 2, 2), mask_of({1, 0, 255, 0}, 2, 2));
    CHECK(cm.total() == 2);
    CHECK(cm.tp == 1);
    CHECK(cm.tn == 1);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS(confusion(Mask(2, 2, 0), Mask(3, 2, 0)));
  }
}

TEST_CASE("summarize reproduces published rows") {
  // zonal model 1, forested region
  {
    const MetricSummary s = summarize({2983030, 695391, 522235, 255792});
    CHECK(s.precision == doctest::Approx(0.851).epsilon(0.002));
    CHECK(s.recall == doctest::Approx(0.921).epsilon(0.002));
    CHECK(s.f1 == doctest::Approx(0.885).epsilon(0.002));
  }
  {
    // up-sampled model 4, lakes region
    const MetricSummary s = summarize({1477359, 2423985, 689700, 455228});
    CHECK(s.precision == doctest::Approx(0.682).epsilon(0.002));
    CHECK(s.recall == doctest::Approx(0.764).epsilon(0.002));
    CHECK(s.f1 == doctest::Approx(0.721).epsilon(0.002));
  }
  {
    const MetricSummary s = summarize({1, 1, 1, 1});
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);
    CHECK(s.accuracy == 0.5);
  }
}

TEST_CASE("degenerate quotients flag instead of NaN") {
  const MetricSummary s = summarize({0, 10, 0, 0});
  CHECK(s.precision == 0.0);
  CHECK(s.degenerate_precision);
  CHECK(s.degenerate_recall);
  CHECK(s.degenerate_f1);
  CHECK(s.accuracy == 1.0);
  CHECK_FALSE(s.degenerate_accuracy);

  const MetricSummary empty = summarize({0, 0, 0, 0});
  CHECK(empty.degenerate_accuracy);
}

TEST_CASE("f1 equals the harmonic mean whenever defined") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionMatrix cm{1 + rng.next_below(100000), rng.next_below(100000),
                       rng.next_below(100000), rng.next_below(100000)};
    const MetricSummary s = summarize(cm);
    if (s.precision > 0 && s.recall > 0) {
      const double harmonic = 2.0 / (1.0 / s.precision + 1.0 / s.recall);
      CHECK(s.f1 == doctest::Approx(harmonic).epsilon(1e-12));
    }
  }
}

TEST_CASE("metrics are monotone in tp") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    ConfusionMatrix cm{rng.next_below(1000), rng.next_below(1000), rng.next_below(1000),
                       rng.next_below(1000)};
    ConfusionMatrix more = cm;
    more.tp += 1 + rng.next_below(100);
    const MetricSummary a = summarize(cm);
    const MetricSummary b = summarize(more);
    CHECK(b.precision >= a.precision - 1e-15);
    CHECK(b.recall >= a.recall - 1e-15);
    CHECK(b.f1 >= a.f1 - 1e-15);
  }
}

TEST_CASE("csv row format") {
  const ConfusionMatrix cm{10, 20, 5, 2};
  const std::string row = metrics_csv_row("model-a", "zone-1", cm, summarize(cm));
  CHECK(row == "model-a,zone-1,20,5,2,10,0.666667,0.833333,0.740741,0.810811");
}
