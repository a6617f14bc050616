#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ravnet/adam.hpp"
#include "ravnet/checkpoint.hpp"
#include "ravnet/config.hpp"
#include "ravnet/params.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tape.hpp"

namespace {

namespace fs = std::filesystem;
using ravnet::Adam;
using ravnet::AdamConfig;
using ravnet::Checkpoint;
using ravnet::Dims;
using ravnet::ParamStore;
using ravnet::SplitMix64;
using ravnet::Tensor;
using ravnet::TensorRecord;
using ravnet::TrainConfig;

class CheckpointFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ravnet_ckpt_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  fs::path dir_;
};

TensorRecord random_record(const std::string& name, Dims d, SplitMix64& rng) {
  TensorRecord r;
  r.name = name;
  r.dims = d;
  for (std::size_t i = 0; i < d.count(); ++i)
    r.data.push_back(float(rng.uniform(-1.0, 1.0)));
  return r;
}

Checkpoint sample_checkpoint() {
  SplitMix64 rng(5);
  Checkpoint ck;
  ck.epoch = 7;
  ck.adam_step = 99;
  ck.config_text = "lr=0.0001\nseed=3\n";
  ck.params.push_back(random_record("enc0.conv1.weight", {2, 1, 3, 3}, rng));
  ck.params.push_back(random_record("enc0.conv1.bias", {1, 2, 1, 1}, rng));
  ck.moments.push_back(random_record("enc0.conv1.weight.m", {2, 1, 3, 3}, rng));
  ck.moments.push_back(random_record("enc0.conv1.weight.v", {2, 1, 3, 3}, rng));
  ck.rng_state = 0x00c0ffee12345678ull;
  return ck;
}

TEST_F(CheckpointFiles, RoundTripPreservesEveryField) {
  Checkpoint ck = sample_checkpoint();
  ravnet::save_checkpoint(path("a.ravn"), ck);
  Checkpoint back = ravnet::load_checkpoint(path("a.ravn"));
  EXPECT_EQ(back.version, 1u);
  EXPECT_EQ(back.epoch, ck.epoch);
  EXPECT_EQ(back.adam_step, ck.adam_step);
  EXPECT_EQ(back.config_text, ck.config_text);
  EXPECT_EQ(back.rng_state, ck.rng_state);
  ASSERT_EQ(back.params.size(), ck.params.size());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    EXPECT_EQ(back.params[i].name, ck.params[i].name);
    EXPECT_TRUE(back.params[i].dims == ck.params[i].dims);
    EXPECT_EQ(back.params[i].data, ck.params[i].data);
  }
  ASSERT_EQ(back.moments.size(), ck.moments.size());
  EXPECT_EQ(back.moments[1].data, ck.moments[1].data);
}

TEST_F(CheckpointFiles, SaveLeavesNoTempFileBehind) {
  ravnet::save_checkpoint(path("a.ravn"), sample_checkpoint());
  EXPECT_TRUE(fs::exists(path("a.ravn")));
  EXPECT_FALSE(fs::exists(path("a.ravn.tmp")));
}

TEST_F(CheckpointFiles, SaveIntoMissingDirectoryFailsWithoutArtifacts) {
  const std::string target = (dir_ / "no_such_dir" / "a.ravn").string();
  EXPECT_THROW(ravnet::save_checkpoint(target, sample_checkpoint()),
               ravnet::IoError);
  EXPECT_FALSE(fs::exists(target));
}

TEST_F(CheckpointFiles, CorruptedMagicIsFormatError) {
  ravnet::save_checkpoint(path("a.ravn"), sample_checkpoint());
  {
    std::fstream f(path("a.ravn"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("JUNK", 4);
  }
  EXPECT_THROW(ravnet::load_checkpoint(path("a.ravn")), ravnet::FormatError);
}

TEST_F(CheckpointFiles, UnsupportedVersionIsFormatError) {
  Checkpoint ck = sample_checkpoint();
  ck.version = 2;
  ravnet::save_checkpoint(path("v2.ravn"), ck);
  try {
    ravnet::load_checkpoint(path("v2.ravn"));
    FAIL() << "expected FormatError";
  } catch (const ravnet::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST_F(CheckpointFiles, TruncationReportsByteOffset) {
  ravnet::save_checkpoint(path("a.ravn"), sample_checkpoint());
  std::ifstream in(path("a.ravn"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  std::ofstream(path("cut.ravn"), std::ios::binary)
      << bytes.substr(0, bytes.size() - 5);
  try {
    ravnet::load_checkpoint(path("cut.ravn"));
    FAIL() << "expected FormatError";
  } catch (const ravnet::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST_F(CheckpointFiles, TrailingBytesRejected) {
  ravnet::save_checkpoint(path("a.ravn"), sample_checkpoint());
  std::ofstream(path("a.ravn"), std::ios::binary | std::ios::app) << "extra";
  try {
    ravnet::load_checkpoint(path("a.ravn"));
    FAIL() << "expected FormatError";
  } catch (const ravnet::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("trailing"), std::string::npos);
  }
}

TEST(ParamRecords, SnapshotKeepsRegistrationOrder) {
  ParamStore<float> store;
  SplitMix64 rng(9);
  store.add("b.weight", Tensor<float>::randn({1, 2, 3, 3}, rng));
  store.add("a.weight", Tensor<float>::randn({1, 1, 1, 1}, rng));
  auto records = ravnet::snapshot_params(store);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].name, "b.weight");
  EXPECT_EQ(records[1].name, "a.weight");
}

TEST(ParamRecords, LoadCopiesValuesIntoExistingTensors) {
  ParamStore<float> store;
  store.add("w", Tensor<float>::zeros({1, 1, 2, 2}));
  TensorRecord rec;
  rec.name = "w";
  rec.dims = {1, 1, 2, 2};
  rec.data = {1.0f, 2.0f, 3.0f, 4.0f};
  ravnet::load_params_into(store, {rec});
  EXPECT_EQ(store.get("w").at(0, 0, 1, 1), 4.0f);
}

TEST(ParamRecords, MissingExtraAndMismatchedTensorsAreStateErrors) {
  ParamStore<float> store;
  store.add("w", Tensor<float>::zeros({1, 1, 2, 2}));

  EXPECT_THROW(ravnet::load_params_into(store, {}), ravnet::StateError);

  TensorRecord wrong;
  wrong.name = "w";
  wrong.dims = {1, 1, 2, 3};
  wrong.data.assign(6, 0.0f);
  try {
    ravnet::load_params_into(store, {wrong});
    FAIL() << "expected StateError";
  } catch (const ravnet::StateError& e) {
    EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos);
  }

  TensorRecord ok;
  ok.name = "w";
  ok.dims = {1, 1, 2, 2};
  ok.data.assign(4, 0.0f);
  TensorRecord extra;
  extra.name = "ghost";
  extra.dims = {1, 1, 1, 1};
  extra.data = {0.0f};
  try {
    ravnet::load_params_into(store, {ok, extra});
    FAIL() << "expected StateError";
  } catch (const ravnet::StateError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

void fill_grad(Tensor<float>& t, float v) {
  auto& g = t.grad_storage();
  for (auto& x : g) x = v;
}

TEST(AdamOptimizer, ZeroGradientLeavesParametersUnchanged) {
  ParamStore<float> store;
  store.add("w", Tensor<float>::full({1, 1, 2, 2}, 3.5f));
  fill_grad(store.get("w"), 0.0f);
  Adam<float> adam(AdamConfig<float>{1e-2f, 0.9f, 0.999f, 1e-8f});
  adam.step(store);
  for (float v : store.get("w").values()) EXPECT_EQ(v, 3.5f);
}

TEST(AdamOptimizer, FirstStepMagnitudeIsLearningRate) {
  ParamStore<float> store;
  store.add("w", Tensor<float>::full({1, 1, 1, 1}, 1.0f));
  fill_grad(store.get("w"), 1.0f);
  Adam<float> adam(AdamConfig<float>{1e-4f, 0.9f, 0.999f, 1e-8f});
  adam.step(store);
  // Bias-corrected m/sqrt(v) is exactly 1 at t=1, so the update is lr up to
  // the eps in the denominator and float storage rounding.
  EXPECT_NEAR(1.0f - store.get("w").values()[0], 1e-4f, 1e-7f);
}

TEST(AdamOptimizer, MissingGradientNamesTheParameter) {
  ParamStore<float> store;
  store.add("w", Tensor<float>::ones({1, 1, 1, 1}));
  store.add("stats", Tensor<float>::zeros({1, 1, 1, 1}), false);
  Adam<float> adam;
  try {
    adam.step(store);
    FAIL() << "expected StateError";
  } catch (const ravnet::StateError& e) {
    EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos);
  }
}

TEST(AdamOptimizer, DeterministicAcrossIdenticalRuns) {
  auto run = [] {
    ParamStore<float> store;
    SplitMix64 rng(33);
    store.add("w", Tensor<float>::randn({1, 2, 4, 4}, rng));
    Adam<float> adam(AdamConfig<float>{1e-3f, 0.9f, 0.999f, 1e-8f});
    for (int i = 0; i < 10; ++i) {
      auto& g = store.get("w").grad_storage();
      for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = float(rng.uniform(-1.0, 1.0));
      adam.step(store);
      store.zero_grads();
    }
    return std::vector<float>(store.get("w").values().begin(),
                              store.get("w").values().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamOptimizer, MomentExportImportRoundTrip) {
  ParamStore<float> store;
  SplitMix64 rng(44);
  store.add("w", Tensor<float>::randn({1, 1, 2, 2}, rng));
  Adam<float> adam;
  fill_grad(store.get("w"), 0.25f);
  adam.step(store);
  fill_grad(store.get("w"), -0.5f);
  adam.step(store);

  auto records = adam.export_moments(store);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].name, "w.m");
  EXPECT_EQ(records[1].name, "w.v");

  Adam<float> fresh;
  fresh.import_moments(store, records, adam.step_count());
  auto again = fresh.export_moments(store);
  EXPECT_EQ(again[0].data, records[0].data);
  EXPECT_EQ(again[1].data, records[1].data);
  EXPECT_EQ(fresh.step_count(), 2u);

  Adam<float> broken;
  EXPECT_THROW(broken.import_moments(store, {}, 2), ravnet::StateError);
}

TEST(ConfigText, SerializeParseRoundTripIsExact) {
  TrainConfig cfg;
  cfg.lr = 3.25e-4;
  cfg.batch_size = 2;
  cfg.max_epochs = 77;
  cfg.early_stop_loss = 1e-3;
  cfg.loss = ravnet::LossKind::bce;
  cfg.seed = 123456789;
  cfg.window.wl = 55.5;
  cfg.window.ww = 150.0;
  cfg.net = ravnet::NetworkConfig::desk();
  cfg.net.encoder = ravnet::EncoderKind::plain;
  cfg.net.decoder = ravnet::DecoderKind::plain;
  cfg.net.use_ca = false;

  TrainConfig back = ravnet::parse_train_config(ravnet::serialize_train_config(cfg));
  EXPECT_EQ(back.lr, cfg.lr);
  EXPECT_EQ(back.batch_size, cfg.batch_size);
  EXPECT_EQ(back.max_epochs, cfg.max_epochs);
  EXPECT_EQ(back.early_stop_loss, cfg.early_stop_loss);
  EXPECT_EQ(back.loss, cfg.loss);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.window.wl, cfg.window.wl);
  EXPECT_EQ(back.window.ww, cfg.window.ww);
  EXPECT_EQ(back.net.levels, cfg.net.levels);
  EXPECT_EQ(back.net.base_channels, cfg.net.base_channels);
  EXPECT_EQ(back.net.encoder, cfg.net.encoder);
  EXPECT_EQ(back.net.decoder, cfg.net.decoder);
  EXPECT_EQ(back.net.use_ca, cfg.net.use_ca);
  EXPECT_EQ(back.net.ca_all_skips, cfg.net.ca_all_skips);
}

TEST(ConfigText, CommentsAndBlankLinesAreSkipped) {
  auto cfg = ravnet::parse_train_config(
      "# a comment\n\n  lr = 0.001\nloss=bce\n");
  EXPECT_EQ(cfg.lr, 0.001);
  EXPECT_EQ(cfg.loss, ravnet::LossKind::bce);
}

TEST(ConfigText, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ravnet::parse_train_config("nope=1\n"), ravnet::ConfigError);
  EXPECT_THROW(ravnet::parse_train_config("lr=fast\n"), ravnet::ConfigError);
  EXPECT_THROW(ravnet::parse_train_config("loss=hinge\n"), ravnet::ConfigError);
  EXPECT_THROW(ravnet::parse_train_config("net.encoder=resnet\n"),
               ravnet::ConfigError);
  EXPECT_THROW(ravnet::parse_train_config("just a line\n"),
               ravnet::ConfigError);
}

TEST(ConfigText, ValidationCatchesNonPositiveKnobs) {
  TrainConfig cfg;
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), ravnet::ConfigError);
  cfg = TrainConfig{};
  cfg.early_stop_loss = -1.0;
  EXPECT_THROW(cfg.validate(), ravnet::ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ravnet::ConfigError);
  cfg = TrainConfig{};
  cfg.window.ww = 0.0;
  EXPECT_THROW(cfg.validate(), ravnet::ConfigError);
}

}  // namespace
