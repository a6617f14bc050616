#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

/// Binarizes pred at the threshold (ties count as positive) and tallies the
/// four outcomes against the binary truth mask.
template <typename T>
ConfusionCounts confusion_counts(const Tensor<T>& pred, const Tensor<T>& truth,
                                 T threshold = T(0.5)) {
  if (!(pred.dims() == truth.dims())) {
    throw ShapeError("confusion_counts: pred/truth dims differ");
  }
  ConfusionCounts c;
  auto pv = pred.values();
  auto tv = truth.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const bool p = pv[i] >= threshold;
    const bool t = tv[i] >= threshold;
    if (p && t) {
      ++c.tp;
    } else if (!p && !t) {
      ++c.tn;
    } else if (p) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

/// Hard-mask metrics on binarized counts, no smoothing. Ratios with a zero
/// denominator (both masks empty, or no positive predictions for precision)
/// score 1.0: a correct all-background prediction is a perfect prediction.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double dsc = 0.0;
  double jsc = 0.0;

  static MetricsReport from_counts(const ConfusionCounts& c) {
    MetricsReport r;
    const std::uint64_t total = c.total();
    r.accuracy = total == 0 ? 1.0
                            : static_cast<double>(c.tp + c.tn) /
                                  static_cast<double>(total);
    r.precision = (c.tp + c.fp) == 0
                      ? 1.0
                      : static_cast<double>(c.tp) /
                            static_cast<double>(c.tp + c.fp);
    const std::uint64_t dice_den = 2 * c.tp + c.fp + c.fn;
    r.dsc = dice_den == 0
                ? 1.0
                : static_cast<double>(2 * c.tp) / static_cast<double>(dice_den);
    const std::uint64_t jac_den = c.tp + c.fp + c.fn;
    r.jsc = jac_den == 0
                ? 1.0
                : static_cast<double>(c.tp) / static_cast<double>(jac_den);
    return r;
  }

  std::string kv_text() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "accuracy=%.6f\nprecision=%.6f\ndsc=%.6f\njsc=%.6f\n",
                  accuracy, precision, dsc, jsc);
    return buf;
  }

  static std::string csv_header() {
    return "sample_id,accuracy,precision,dsc,jsc";
  }

  std::string csv_row(const std::string& sample_id) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f",
                  sample_id.c_str(), accuracy, precision, dsc, jsc);
    return buf;
  }
};

template <typename T>
MetricsReport evaluate_pair(const Tensor<T>& pred, const Tensor<T>& truth,
                            T threshold = T(0.5)) {
  return MetricsReport::from_counts(confusion_counts(pred, truth, threshold));
}

/// Dataset aggregation. The per-slice mean averages each slice's report;
/// global pooling sums the confusion counts first and scores the pool once.
enum class Aggregation { per_slice_mean, global_pool };

inline MetricsReport aggregate_reports(const std::vector<ConfusionCounts>& counts,
                                       Aggregation mode) {
  if (counts.empty()) throw EmptyInputError("aggregate_reports: no samples");
  if (mode == Aggregation::global_pool) {
    ConfusionCounts pool;
    for (const auto& c : counts) pool += c;
    return MetricsReport::from_counts(pool);
  }
  MetricsReport mean;
  for (const auto& c : counts) {
    MetricsReport r = MetricsReport::from_counts(c);
    mean.accuracy += r.accuracy;
    mean.precision += r.precision;
    mean.dsc += r.dsc;
    mean.jsc += r.jsc;
  }
  const double n = static_cast<double>(counts.size());
  mean.accuracy /= n;
  mean.precision /= n;
  mean.dsc /= n;
  mean.jsc /= n;
  return mean;
}

}  // namespace ravnet
