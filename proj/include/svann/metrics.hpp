// Confusion-matrix construction and summary metrics for binary wetland
// classification. Wetland (1) is the positive class; 255 pixels in either
// mask are excluded from the counts.

#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "svann/raster.hpp"

namespace svann {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp; tn += o.tn; fp += o.fp; fn += o.fn;
    return *this;
  }
};

inline ConfusionMatrix confusion(const Mask& pred, const Mask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height())
    throw std::invalid_argument("confusion: mask dimensions differ");
  ConfusionMatrix cm;
  for (Eigen::Index i = 0; i < pred.values.size(); ++i) {
    const std::uint8_t p = pred.values(i);
    const std::uint8_t t = truth.values(i);
    if (p == kMaskNodata || t == kMaskNodata) continue;
    if (t == 1)
      (p == 1 ? cm.tp : cm.fn)++;
    else
      (p == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

/// Precision, recall, F1 and pixel accuracy. A 0/0 quotient yields 0 with
/// the matching degenerate flag set, so reports stay comparable instead of
/// propagating NaN.
struct MetricSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;
  bool degenerate_accuracy = false;
};

inline MetricSummary summarize(const ConfusionMatrix& cm) {
  MetricSummary s;
  const double tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp == 0)
    s.degenerate_precision = true;
  else
    s.precision = tp / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0)
    s.degenerate_recall = true;
  else
    s.recall = tp / static_cast<double>(cm.tp + cm.fn);
  if (s.precision + s.recall == 0.0)
    s.degenerate_f1 = true;
  else
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  if (cm.total() == 0)
    s.degenerate_accuracy = true;
  else
    s.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  return s;
}

inline constexpr const char* kMetricsCsvHeader =
    "model,zone,tn,fp,fn,tp,precision,recall,f1,accuracy";

inline std::string metrics_csv_row(const std::string& model, const std::string& zone,
                                   const ConfusionMatrix& cm, const MetricSummary& s) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << model << ',' << zone << ',' << cm.tn << ',' << cm.fp << ',' << cm.fn << ','
      << cm.tp << ',' << s.precision << ',' << s.recall << ',' << s.f1 << ',' << s.accuracy;
  return out.str();
}

}  // namespace svann
