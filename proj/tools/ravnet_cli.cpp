#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "ravnet/checkpoint.hpp"
#include "ravnet/config.hpp"
#include "ravnet/dataset.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/experiments.hpp"
#include "ravnet/gradcheck_suite.hpp"
#include "ravnet/metrics.hpp"
#include "ravnet/png_io.hpp"
#include "ravnet/trainer.hpp"
#include "ravnet/windowing.hpp"

// Command-line front end for the toolkit. Results go to files or stdout,
// diagnostics to stderr. Exit codes: 0 success, 1 usage error, 2 runtime
// error (including a failing gradcheck).

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::size_t count = 0;
  std::uint32_t size = 32;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int run_synth(const SynthArgs& a) {
  ravnet::SynthResult r = ravnet::synth_generate(a.count, a.size, a.seed, a.out_dir);
  std::cout << r.manifest_path << "\n";
  std::cerr << "synth: wrote " << r.manifest.entries.size() << " samples to " << a.out_dir << "\n";
  return 0;
}

struct PreprocessArgs {
  std::string manifest;
  double wl = 60.0;
  double ww = 200.0;
  std::string out_dir;
};

int run_preprocess(const PreprocessArgs& a) {
  ravnet::WindowSpec window{a.wl, a.ww};
  window.validate();
  ravnet::Manifest m = ravnet::load_manifest(a.manifest);
  fs::create_directories(a.out_dir);
  for (const auto& entry : m.entries) {
    ravnet::SliceSample s = ravnet::read_slice(entry);
    auto values = ravnet::hu_window<double>(s.image.data, window);
    ravnet::Gray8Image img{s.image.height, s.image.width, {}};
    img.pixels.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(std::lround(values[i] * 255.0));
    }
    const fs::path out = fs::path(a.out_dir) / (entry.id + ".png");
    ravnet::write_png_gray8(out.string(), img);
  }
  std::cerr << "preprocess: wrote " << m.entries.size() << " previews to " << a.out_dir << "\n";
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string config_path;
  std::string out;
  double lr = 0.0;
  int batch_size = 0;
  int max_epochs = 0;
  double early_stop_loss = 0.0;
  std::string loss;
  std::uint64_t seed = 0;
  double wl = 0.0;
  double ww = 0.0;
};

// Checkpoint `model.ravn` gets siblings `model.last.ravn` and
// `model.history.csv`.
fs::path sibling(const fs::path& out, const std::string& tag, const std::string& ext) {
  fs::path p = out.parent_path() / out.stem();
  p += tag;
  p += ext.empty() ? out.extension().string() : ext;
  return p;
}

int run_train(const TrainArgs& a, const CLI::App* cmd) {
  ravnet::TrainConfig cfg;
  if (!a.config_path.empty()) cfg = ravnet::load_train_config(a.config_path);
  if (cmd->count("--lr")) cfg.lr = a.lr;
  if (cmd->count("--batch-size")) cfg.batch_size = a.batch_size;
  if (cmd->count("--max-epochs")) cfg.max_epochs = a.max_epochs;
  if (cmd->count("--early-stop-loss")) cfg.early_stop_loss = a.early_stop_loss;
  if (cmd->count("--loss")) cfg.loss = a.loss == "bce" ? ravnet::LossKind::bce : ravnet::LossKind::dice;
  if (cmd->count("--seed")) cfg.seed = a.seed;
  if (cmd->count("--wl")) cfg.window.wl = a.wl;
  if (cmd->count("--ww")) cfg.window.ww = a.ww;
  cfg.validate();

  ravnet::Manifest m = ravnet::load_manifest(a.manifest);
  // Hold out a fifth of the corpus for validation; corpora too small to
  // split validate against the training set itself.
  ravnet::Manifest train_m = m, val_m = m;
  if (m.entries.size() >= 5) {
    auto split = ravnet::split_dataset(m, 0.8, cfg.seed);
    train_m = split.first;
    val_m = split.second;
  }

  const fs::path out = a.out;
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  ravnet::TrainPaths paths{out.string(), sibling(out, ".last", "").string(),
                           sibling(out, "", ".history.csv").string()};
  ravnet::TrainResult r = ravnet::train<float>(cfg, train_m, val_m, paths);
  std::cerr << "train: ran " << r.history.size() << " epochs ("
            << (r.stopped_early ? "early exit" : "epoch limit") << "), best epoch "
            << r.best_epoch << " val dsc " << r.best_val_dsc << "\n";
  std::cerr << "train: checkpoint " << paths.best_checkpoint << ", history " << paths.history
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string report;
};

int run_eval(const EvalArgs& a) {
  ravnet::Checkpoint ck = ravnet::load_checkpoint(a.checkpoint);
  ravnet::RestoredNetwork restored = ravnet::restore_network(ck);
  ravnet::Manifest m = ravnet::load_manifest(a.manifest);
  ravnet::EvalResult r = ravnet::evaluate_network(restored.net, m, restored.cfg.window);

  std::string csv = ravnet::MetricsReport::csv_header() + "\n";
  for (const auto& row : r.rows) csv += row.report.csv_row(row.id) + "\n";
  ravnet::detail::write_all_bytes(a.report, csv);
  std::cout << r.aggregate.kv_text();
  std::cerr << "eval: " << r.rows.size() << " samples, report " << a.report << "\n";
  return 0;
}

struct PredictArgs {
  std::string checkpoint;
  std::string image;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  ravnet::Checkpoint ck = ravnet::load_checkpoint(a.checkpoint);
  ravnet::RestoredNetwork restored = ravnet::restore_network(ck);
  ravnet::HuImage hu = ravnet::read_hu_slice(a.image);
  auto values = ravnet::hu_window<float>(hu.data, restored.cfg.window);
  ravnet::Tensor<float> x =
      ravnet::Tensor<float>::from({1, 1, int(hu.height), int(hu.width)}, values);
  ravnet::Tensor<float> prob = restored.net.forward(x, ravnet::Mode::infer);

  ravnet::Gray8Image mask{hu.height, hu.width, {}};
  mask.pixels.resize(prob.size());
  auto pv = prob.values();
  for (std::size_t i = 0; i < pv.size(); ++i) mask.pixels[i] = pv[i] >= 0.5f ? 255 : 0;
  ravnet::write_png_gray8(a.out, mask);
  std::cerr << "predict: wrote " << a.out << "\n";
  return 0;
}

struct GradcheckArgs {
  std::string module = "all";
  std::uint64_t seed = 0;
  int seeds = 1;
};

int run_gradcheck(const GradcheckArgs& a) {
  ravnet::GradCheckSuiteResult r =
      ravnet::run_gradcheck_suite(a.module, a.seed, a.seeds, &std::cout);
  if (!r.pass) {
    std::cerr << "gradcheck: failures above tolerance\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RA V-Net liver segmentation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic phantom corpus");
  synth_cmd->add_option("--count", synth.count, "Number of samples")->required();
  synth_cmd->add_option("--size", synth.size, "Square slice extent in pixels")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Corpus seed")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  PreprocessArgs pre;
  CLI::App* pre_cmd = app.add_subcommand("preprocess", "Window HU slices into PNG previews");
  pre_cmd->add_option("--manifest", pre.manifest, "Dataset manifest CSV")->required();
  pre_cmd->add_option("--wl", pre.wl, "Window level in HU")->capture_default_str();
  pre_cmd->add_option("--ww", pre.ww, "Window width in HU")->capture_default_str();
  pre_cmd->add_option("--out-dir", pre.out_dir, "Output directory")->required();

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a network on a manifest");
  train_cmd->add_option("--manifest", tr.manifest, "Dataset manifest CSV")->required();
  train_cmd->add_option("--config", tr.config_path, "Config file (key=value lines)");
  train_cmd->add_option("--out", tr.out, "Output checkpoint path")->required();
  train_cmd->add_option("--lr", tr.lr, "Learning rate (overrides config)");
  train_cmd->add_option("--batch-size", tr.batch_size, "Batch size (overrides config)");
  train_cmd->add_option("--max-epochs", tr.max_epochs, "Epoch limit (overrides config)");
  train_cmd->add_option("--early-stop-loss", tr.early_stop_loss,
                        "Mean-loss exit threshold (overrides config)");
  train_cmd->add_option("--loss", tr.loss, "Loss function (overrides config)")
      ->check(CLI::IsMember({"dice", "bce"}));
  train_cmd->add_option("--seed", tr.seed, "Master seed (overrides config)");
  train_cmd->add_option("--wl", tr.wl, "Window level in HU (overrides config)");
  train_cmd->add_option("--ww", tr.ww, "Window width in HU (overrides config)");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--manifest", ev.manifest, "Dataset manifest CSV")->required();
  eval_cmd->add_option("--report", ev.report, "Per-sample metrics CSV to write")->required();

  PredictArgs pd;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Segment one HU slice into a PNG mask");
  predict_cmd->add_option("--checkpoint", pd.checkpoint, "Checkpoint file")->required();
  predict_cmd->add_option("--image", pd.image, "Input HUSL slice")->required();
  predict_cmd->add_option("--out", pd.out, "Output PNG mask path")->required();

  GradcheckArgs gc;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
  gc_cmd->add_option("--module", gc.module, "all, tensor, layers or arch")
      ->check(CLI::IsMember({"all", "tensor", "layers", "arch"}))
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "Base seed")->capture_default_str();
  gc_cmd->add_option("--seeds", gc.seeds, "Seeds per case, counting up from --seed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (pre_cmd->parsed()) return run_preprocess(pre);
    if (train_cmd->parsed()) return run_train(tr, train_cmd);
    if (eval_cmd->parsed()) return run_eval(ev);
    if (predict_cmd->parsed()) return run_predict(pd);
    if (gc_cmd->parsed()) return run_gradcheck(gc);
  } catch (const std::exception& e) {
    std::cerr << "ravnet: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
