#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/config.hpp"
#include "ravnet/dataset.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/metrics.hpp"
#include "ravnet/trainer.hpp"

// Benchmark harness comparing training configurations on a shared synthetic
// corpus: the two loss functions against each other, and encoder/decoder
// variants against a plain baseline. Every variant runs through the same
// train/evaluate path with the same seed, so rows differ only in the knob
// under study and the whole table is reproducible bit for bit.

namespace ravnet {

struct ExperimentRow {
  std::string label;
  MetricsReport report;
};

struct ExperimentTable {
  std::vector<std::string> columns;
  std::vector<ExperimentRow> rows;

  std::string str() const {
    std::string s = format_line("variant", [](const std::string& c) { return c; });
    for (const auto& r : rows) {
      s += format_line(r.label, [&](const std::string& c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.4f", metric(r.report, c));
        return std::string(buf);
      });
    }
    return s;
  }

  std::string csv() const {
    std::string s = "variant";
    for (const auto& c : columns) s += "," + c;
    s += "\n";
    for (const auto& r : rows) {
      s += r.label;
      for (const auto& c : columns) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), ",%.6f", metric(r.report, c));
        s += buf;
      }
      s += "\n";
    }
    return s;
  }

  static double metric(const MetricsReport& r, const std::string& column) {
    if (column == "accuracy") return r.accuracy;
    if (column == "precision") return r.precision;
    if (column == "dsc") return r.dsc;
    if (column == "jsc") return r.jsc;
    throw ConfigError("experiment table: unknown metric column '" + column + "'");
  }

 private:
  template <typename CellFn>
  std::string format_line(const std::string& label, CellFn cell) const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-10s", label.c_str());
    std::string s = buf;
    for (const auto& c : columns) {
      std::snprintf(buf, sizeof(buf), " %10s", cell(c).c_str());
      s += buf;
    }
    s += "\n";
    return s;
  }
};

/// Trains `cfg` on the training split (validating against it; the held-out
/// split stays unseen until now) and reports final-state metrics on the test
/// split.
inline MetricsReport run_experiment_variant(const TrainConfig& cfg, const Manifest& train_m,
                                            const Manifest& test_m) {
  TrainResult r = train<float>(cfg, train_m, train_m);
  RestoredNetwork restored = restore_network(r.last);
  EvalResult ev = evaluate_network(restored.net, test_m, cfg.window, Aggregation::per_slice_mean);
  return ev.aggregate;
}

/// Same model under dice and bce loss; rows in that order.
inline ExperimentTable loss_compare_experiment(const Manifest& train_m, const Manifest& test_m,
                                               const TrainConfig& base_cfg) {
  ExperimentTable table;
  table.columns = {"accuracy", "precision", "dsc"};
  for (LossKind kind : {LossKind::dice, LossKind::bce}) {
    TrainConfig cfg = base_cfg;
    cfg.loss = kind;
    table.rows.push_back(
        {kind == LossKind::dice ? "dice" : "bce", run_experiment_variant(cfg, train_m, test_m)});
  }
  return table;
}

/// Architecture ladder on one corpus: plain encoder/decoder baseline, the
/// residual encoder alone, then the full model with attention recovery and
/// channel attention. Rows in that order.
inline ExperimentTable ablation_experiment(const Manifest& train_m, const Manifest& test_m,
                                           const TrainConfig& base_cfg) {
  struct Variant {
    const char* label;
    EncoderKind encoder;
    DecoderKind decoder;
    bool use_ca;
  };
  const Variant variants[] = {
      {"unet", EncoderKind::plain, DecoderKind::plain, false},
      {"cofres", EncoderKind::cofres, DecoderKind::plain, false},
      {"ravnet", EncoderKind::cofres, DecoderKind::ar, true},
  };
  ExperimentTable table;
  table.columns = {"accuracy", "precision", "dsc", "jsc"};
  for (const Variant& v : variants) {
    TrainConfig cfg = base_cfg;
    cfg.net.encoder = v.encoder;
    cfg.net.decoder = v.decoder;
    cfg.net.use_ca = v.use_ca;
    table.rows.push_back({v.label, run_experiment_variant(cfg, train_m, test_m)});
  }
  return table;
}

}  // namespace ravnet
