#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/adam.hpp"
#include "ravnet/arch.hpp"
#include "ravnet/checkpoint.hpp"
#include "ravnet/config.hpp"
#include "ravnet/dataset.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/losses.hpp"
#include "ravnet/metrics.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tape.hpp"

namespace ravnet {

template <typename T>
struct LoadedSample {
  Tensor<T> image;  // windowed, (1,1,H,W)
  Tensor<T> mask;   // binary, (1,1,H,W)
  std::string id;
};

template <typename T>
std::vector<LoadedSample<T>> load_samples(const Manifest& m,
                                          const WindowSpec& window) {
  std::vector<LoadedSample<T>> out;
  out.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    SliceSample s = read_slice(e);
    out.push_back({to_image_tensor<T>(s, window), to_mask_tensor<T>(s), s.id});
  }
  return out;
}

struct HistoryRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_dsc = 0.0;
};

inline void write_history_csv(const std::string& path,
                              const std::vector<HistoryRow>& history) {
  std::string out = "epoch,train_loss,val_dsc\n";
  char buf[96];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", row.epoch,
                  row.train_loss, row.val_dsc);
    out += buf;
  }
  detail::write_all_bytes(path, out);
}

/// Output locations; any empty path disables that file.
struct TrainPaths {
  std::string best_checkpoint;  // best epoch by validation DSC
  std::string last_checkpoint;  // most recent epoch
  std::string history;          // per-epoch CSV
};

struct TrainResult {
  std::vector<HistoryRow> history;
  Checkpoint best;  // in-memory copy of the best-by-val-DSC checkpoint
  Checkpoint last;
  int best_epoch = 0;
  double best_val_dsc = 0.0;
  bool stopped_early = false;
};

struct EvalRow {
  std::string id;
  MetricsReport report;
};

struct EvalResult {
  MetricsReport aggregate;
  std::vector<EvalRow> rows;
};

template <typename T>
EvalResult evaluate_samples(RaVNet<T>& net,
                            const std::vector<LoadedSample<T>>& samples,
                            Aggregation agg = Aggregation::per_slice_mean) {
  if (samples.empty()) throw EmptyInputError("evaluate: no samples");
  EvalResult result;
  std::vector<ConfusionCounts> counts;
  counts.reserve(samples.size());
  for (const auto& s : samples) {
    Tensor<T> pred = net.forward(s.image, Mode::infer);
    ConfusionCounts c = confusion_counts(pred, s.mask);
    counts.push_back(c);
    result.rows.push_back({s.id, MetricsReport::from_counts(c)});
  }
  result.aggregate = aggregate_reports(counts, agg);
  return result;
}

template <typename T>
EvalResult evaluate_network(RaVNet<T>& net, const Manifest& m,
                            const WindowSpec& window,
                            Aggregation agg = Aggregation::per_slice_mean) {
  auto samples = load_samples<T>(m, window);
  return evaluate_samples(net, samples, agg);
}

namespace detail {

template <typename T>
Checkpoint make_snapshot(const TrainConfig& cfg, const RaVNet<T>& net,
                         const Adam<T>& adam, int epoch,
                         std::uint64_t rng_state) {
  Checkpoint ck;
  ck.epoch = std::uint32_t(epoch);
  ck.adam_step = adam.step_count();
  ck.config_text = serialize_train_config(cfg);
  ck.params = snapshot_params(net.params());
  ck.moments = adam.export_moments(net.params());
  ck.rng_state = rng_state;
  return ck;
}

}  // namespace detail

/// Seeded training loop: per-epoch shuffle, forward, loss, backward, Adam.
/// Exits when the epoch-mean training loss drops under early_stop_loss or
/// max_epochs is reached. Checkpoints every epoch; the best-by-validation-DSC
/// epoch is kept both on disk (if a path is given) and in the result.
template <typename T = float>
TrainResult train(const TrainConfig& cfg, const Manifest& train_manifest,
                  const Manifest& val_manifest, const TrainPaths& paths = {}) {
  cfg.validate();
  if (train_manifest.entries.empty()) {
    throw EmptyInputError("train manifest is empty");
  }
  if (val_manifest.entries.empty()) {
    throw EmptyInputError("validation manifest is empty");
  }

  auto train_set = load_samples<T>(train_manifest, cfg.window);
  auto val_set = load_samples<T>(val_manifest, cfg.window);

  SplitMix64 root(cfg.seed);
  const std::uint64_t net_seed = root.next_u64();
  SplitMix64 data_rng(root.next_u64());

  RaVNet<T> net(cfg.net, net_seed);
  Adam<T> adam(AdamConfig<T>{T(cfg.lr), T(0.9), T(0.999), T(1e-8)});

  TrainResult result;
  double best_dsc = -1.0;
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[data_rng.next_below(i + 1)]);
    }

    double loss_sum = 0.0;
    std::size_t at = 0;
    while (at < n) {
      const std::size_t group =
          std::min<std::size_t>(std::size_t(cfg.batch_size), n - at);
      net.params().zero_grads();
      for (std::size_t j = 0; j < group; ++j, ++at) {
        const auto& sample = train_set[order[at]];
        Tape<T> tape;
        Tensor<T> pred = net.forward(sample.image, Mode::train);
        Tensor<T> loss = cfg.loss == LossKind::dice
                             ? dice_loss(pred, sample.mask)
                             : bce_loss(pred, sample.mask);
        const double value = double(loss.item());
        if (!std::isfinite(value)) {
          throw DivergenceError("training diverged: non-finite loss at epoch " +
                                std::to_string(epoch));
        }
        loss_sum += value;
        Tensor<T> scaled =
            group > 1 ? scale(loss, T(1) / T(group)) : loss;
        tape.backward(scaled);
      }
      adam.step(net.params());
    }

    const double epoch_mean = loss_sum / double(n);
    double val_dsc = 0.0;
    for (const auto& s : val_set) {
      Tensor<T> pred = net.forward(s.image, Mode::infer);
      val_dsc += evaluate_pair(pred, s.mask).dsc;
    }
    val_dsc /= double(val_set.size());

    result.history.push_back({epoch, epoch_mean, val_dsc});

    Checkpoint ck =
        detail::make_snapshot(cfg, net, adam, epoch, data_rng.state());
    if (!paths.last_checkpoint.empty()) {
      save_checkpoint(paths.last_checkpoint, ck);
    }
    if (val_dsc > best_dsc) {
      best_dsc = val_dsc;
      result.best_epoch = epoch;
      result.best_val_dsc = val_dsc;
      result.best = ck;
      if (!paths.best_checkpoint.empty()) {
        save_checkpoint(paths.best_checkpoint, ck);
      }
    }
    result.last = std::move(ck);

    if (epoch_mean < cfg.early_stop_loss) {
      result.stopped_early = true;
      break;
    }
  }

  if (!paths.history.empty()) write_history_csv(paths.history, result.history);
  return result;
}

struct RestoredNetwork {
  TrainConfig cfg;
  RaVNet<float> net;
};

/// Rebuilds the network described by the checkpoint's config echo and loads
/// its parameters. Optimizer moments are ignored here; pass an Adam instance
/// to resume() when continuing training.
inline RestoredNetwork restore_network(const Checkpoint& ck) {
  TrainConfig cfg = parse_train_config(ck.config_text);
  RaVNet<float> net(cfg.net, cfg.seed);
  load_params_into(net.params(), ck.params);
  return {std::move(cfg), std::move(net)};
}

}  // namespace ravnet
