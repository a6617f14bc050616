#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "ravnet/checkpoint.hpp"
#include "ravnet/config.hpp"
#include "ravnet/dataset.hpp"
#include "ravnet/png_io.hpp"

// Spawns the installed binary (path injected at compile time) and checks the
// documented exit-code and file contracts.

namespace {

namespace fs = std::filesystem;

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ravnet_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Returns the exit code; stdout/stderr land in out_ / err_.
  int run(const std::string& args) {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd =
        std::string(RAVNET_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    out_ = slurp(out);
    err_ = slurp(err);
    return WEXITSTATUS(status);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  std::string desk_config(int max_epochs) const {
    return "net.levels = 2\nnet.base_channels = 8\nmax_epochs = " + std::to_string(max_epochs) +
           "\nearly_stop_loss = 1e-9\nseed = 5\n";
  }

  void write_file(const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
  }

  fs::path dir_;
  std::string out_, err_;
};

TEST_F(CliRun, HelpListsEverySubcommandAndExitsZero) {
  ASSERT_EQ(run("--help"), 0);
  for (const char* sub : {"synth", "preprocess", "train", "eval", "predict", "gradcheck"}) {
    EXPECT_NE(out_.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliRun, SubcommandHelpListsFlags) {
  ASSERT_EQ(run("train --help"), 0);
  for (const char* flag : {"--manifest", "--config", "--out", "--lr", "--loss"}) {
    EXPECT_NE(out_.find(flag), std::string::npos) << flag;
  }
}

TEST_F(CliRun, UsageErrorsExitOne) {
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("synth --count 2 --bogus 1 --out-dir " + path("d")), 1);
  EXPECT_EQ(run("synth --out-dir " + path("d")), 1);  // missing required --count
  EXPECT_EQ(run(""), 1);                              // missing subcommand
}

TEST_F(CliRun, SynthWritesCorpusAndPrintsManifestPath) {
  ASSERT_EQ(run("synth --count 4 --size 32 --seed 1 --out-dir " + path("corpus")), 0);
  EXPECT_EQ(out_, path("corpus") + "/manifest.csv\n");
  int husl = 0, msk = 0;
  for (const auto& e : fs::directory_iterator(path("corpus"))) {
    if (e.path().extension() == ".husl") ++husl;
    if (e.path().extension() == ".msk") ++msk;
  }
  EXPECT_EQ(husl, 4);
  EXPECT_EQ(msk, 4);
  ravnet::Manifest m = ravnet::load_manifest(path("corpus") + "/manifest.csv");
  EXPECT_EQ(m.entries.size(), 4u);
}

TEST_F(CliRun, SynthIsIdempotentAcrossInvocations) {
  ASSERT_EQ(run("synth --count 2 --size 16 --seed 9 --out-dir " + path("a")), 0);
  ASSERT_EQ(run("synth --count 2 --size 16 --seed 9 --out-dir " + path("b")), 0);
  for (const char* name : {"phantom_000.husl", "phantom_000.msk", "manifest.csv"}) {
    EXPECT_EQ(slurp(path("a") + "/" + name), slurp(path("b") + "/" + name)) << name;
  }
}

TEST_F(CliRun, PreprocessEmitsOnePngPerSample) {
  ASSERT_EQ(run("synth --count 3 --size 16 --seed 2 --out-dir " + path("corpus")), 0);
  ASSERT_EQ(run("preprocess --manifest " + path("corpus") + "/manifest.csv --wl 60 --ww 200 "
                "--out-dir " + path("prev")), 0);
  for (const char* id : {"phantom_000", "phantom_001", "phantom_002"}) {
    ravnet::Gray8Image img = ravnet::read_png_gray8(path("prev") + "/" + id + ".png");
    EXPECT_EQ(img.height, 16u);
    EXPECT_EQ(img.width, 16u);
  }
}

TEST_F(CliRun, TrainEvalPredictRoundTrip) {
  ASSERT_EQ(run("synth --count 5 --size 16 --seed 3 --out-dir " + path("corpus")), 0);
  write_file(path("train.cfg"), desk_config(2));
  ASSERT_EQ(run("train --manifest " + path("corpus") + "/manifest.csv --config " +
                path("train.cfg") + " --out " + path("model.ravn")),
            0)
      << err_;
  EXPECT_TRUE(fs::exists(path("model.ravn")));
  EXPECT_TRUE(fs::exists(path("model.last.ravn")));
  EXPECT_TRUE(fs::exists(path("model.history.csv")));
  const std::string history = slurp(path("model.history.csv"));
  EXPECT_EQ(history.rfind("epoch,train_loss,val_dsc\n", 0), 0u);

  ASSERT_EQ(run("eval --checkpoint " + path("model.ravn") + " --manifest " + path("corpus") +
                "/manifest.csv --report " + path("report.csv")),
            0)
      << err_;
  const std::string report = slurp(path("report.csv"));
  EXPECT_EQ(report.rfind("sample_id,accuracy,precision,dsc,jsc\n", 0), 0u);
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 6);  // header + 5 samples
  EXPECT_NE(out_.find("dsc="), std::string::npos);

  ASSERT_EQ(run("predict --checkpoint " + path("model.ravn") + " --image " + path("corpus") +
                "/phantom_000.husl --out " + path("mask.png")),
            0)
      << err_;
  ravnet::Gray8Image mask = ravnet::read_png_gray8(path("mask.png"));
  EXPECT_EQ(mask.height, 16u);
  EXPECT_EQ(mask.width, 16u);
  for (std::uint8_t p : mask.pixels) EXPECT_TRUE(p == 0 || p == 255);
}

TEST_F(CliRun, ExplicitFlagOverridesConfigFile) {
  ASSERT_EQ(run("synth --count 1 --size 16 --seed 4 --out-dir " + path("corpus")), 0);
  write_file(path("train.cfg"), desk_config(1) + "lr = 0.125\n");
  ASSERT_EQ(run("train --manifest " + path("corpus") + "/manifest.csv --config " +
                path("train.cfg") + " --lr 1e-3 --out " + path("model.ravn")),
            0)
      << err_;
  ravnet::Checkpoint ck = ravnet::load_checkpoint(path("model.ravn"));
  ravnet::TrainConfig cfg = ravnet::parse_train_config(ck.config_text);
  EXPECT_DOUBLE_EQ(cfg.lr, 1e-3);
}

TEST_F(CliRun, MissingInputsExitTwo) {
  EXPECT_EQ(run("train --manifest " + path("nope.csv") + " --out " + path("m.ravn")), 2);
  EXPECT_NE(err_.find("nope.csv"), std::string::npos);
  ASSERT_EQ(run("synth --count 1 --size 16 --seed 1 --out-dir " + path("corpus")), 0);
  EXPECT_EQ(run("eval --checkpoint " + path("nope.ravn") + " --manifest " + path("corpus") +
                "/manifest.csv --report " + path("r.csv")),
            2);
}

TEST_F(CliRun, GradcheckTableCoversModuleAndExitsZero) {
  ASSERT_EQ(run("gradcheck --module tensor --seed 3"), 0) << out_;
  EXPECT_EQ(std::count(out_.begin(), out_.end(), '\n'), 21);
  EXPECT_EQ(out_.find("FAIL"), std::string::npos);
  EXPECT_NE(out_.find("softmax_axis1"), std::string::npos);
}

TEST_F(CliRun, GradcheckRejectsUnknownModule) {
  EXPECT_EQ(run("gradcheck --module everything"), 1);
}

}  // namespace
