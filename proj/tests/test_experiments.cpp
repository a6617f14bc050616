#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "ravnet/dataset.hpp"
#include "ravnet/experiments.hpp"

namespace {

namespace fs = std::filesystem;
using ravnet::ExperimentTable;
using ravnet::Manifest;
using ravnet::TrainConfig;

class ExperimentCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ravnet_exp_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    auto corpus = ravnet::synth_generate(6, 16, 11, dir_.string());
    auto split = ravnet::split_dataset(corpus.manifest, 0.8, 11);
    train_m = split.first;
    test_m = split.second;
  }
  void TearDown() override { fs::remove_all(dir_); }

  TrainConfig tiny_config() const {
    TrainConfig cfg;
    cfg.net = ravnet::NetworkConfig::desk();
    cfg.seed = 3;
    cfg.max_epochs = 2;
    cfg.early_stop_loss = 1e-9;
    return cfg;
  }

  fs::path dir_;
  Manifest train_m, test_m;
};

TEST_F(ExperimentCorpus, LossCompareEmitsDiceThenBceRows) {
  ExperimentTable t = ravnet::loss_compare_experiment(train_m, test_m, tiny_config());
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].label, "dice");
  EXPECT_EQ(t.rows[1].label, "bce");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"accuracy", "precision", "dsc"}));
  for (const auto& r : t.rows) {
    EXPECT_GE(r.report.dsc, 0.0);
    EXPECT_LE(r.report.dsc, 1.0);
  }
  EXPECT_EQ(t.csv().rfind("variant,accuracy,precision,dsc\n", 0), 0u);
}

TEST_F(ExperimentCorpus, LossCompareIsDeterministic) {
  ExperimentTable a = ravnet::loss_compare_experiment(train_m, test_m, tiny_config());
  ExperimentTable b = ravnet::loss_compare_experiment(train_m, test_m, tiny_config());
  EXPECT_EQ(a.csv(), b.csv());
}

TEST_F(ExperimentCorpus, AblationEmitsTheArchitectureLadder) {
  ExperimentTable t = ravnet::ablation_experiment(train_m, test_m, tiny_config());
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].label, "unet");
  EXPECT_EQ(t.rows[1].label, "cofres");
  EXPECT_EQ(t.rows[2].label, "ravnet");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"accuracy", "precision", "dsc", "jsc"}));
  for (const auto& r : t.rows) {
    EXPECT_GE(r.report.dsc, 0.0);
    EXPECT_LE(r.report.dsc, 1.0);
  }
  const std::string text = t.str();
  EXPECT_EQ(text.rfind("variant", 0), 0u);
  EXPECT_NE(text.find("cofres"), std::string::npos);
}

TEST_F(ExperimentCorpus, UnknownMetricColumnRejected) {
  EXPECT_THROW(ExperimentTable::metric(ravnet::MetricsReport{}, "recall"), ravnet::ConfigError);
}

}  // namespace
