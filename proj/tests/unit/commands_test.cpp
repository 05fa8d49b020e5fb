#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cyclegan/checkpoint.hpp"
#include "cyclegan/commands.hpp"
#include "cyclegan/config_io.hpp"
#include "cyclegan/errors.hpp"
#include "cyclegan/loss_log.hpp"
#include "cyclegan/plot.hpp"
#include "test_support.hpp"

namespace cyclegan {
namespace {

namespace fs = std::filesystem;

using testing::TempDir;

fs::path write_run_config(const TempDir& dir, const fs::path& data, int total_epochs = 1) {
  RunSettings s;
  s.train = testing::tiny_config(16);
  s.train.schedule = {0, total_epochs};
  s.dataset_root = data;
  s.output_dir = dir / "run";
  const auto path = dir / "run.yaml";
  std::ofstream(path) << emit_config(s);
  return path;
}

TEST(ExitCodeTest, OneCodePerErrorClass) {
  EXPECT_EQ(exit_code_for(ParseError("k", 1, "m")), ExitCode::Config);
  EXPECT_EQ(exit_code_for(ConfigError("k", "m")), ExitCode::Config);
  EXPECT_EQ(exit_code_for(DatasetError("m")), ExitCode::Dataset);
  EXPECT_EQ(exit_code_for(TrainingError("c", "m")), ExitCode::Training);
  EXPECT_EQ(exit_code_for(CheckpointError(CheckpointError::Kind::Corrupt, "m")), ExitCode::Checkpoint);
  EXPECT_EQ(exit_code_for(FormatError("m")), ExitCode::Io);
  EXPECT_EQ(exit_code_for(ShapeError("m")), ExitCode::Shape);
  EXPECT_EQ(exit_code_for(std::runtime_error("m")), ExitCode::Internal);
}

TEST(TranslateNamesTest, CycleEmitsRealFakeRecTriple) {
  EXPECT_EQ(translate_output_names("in/cat.png", Direction::Cycle),
            (std::vector<std::string>{"cat_real.png", "cat_fake.png", "cat_rec.png"}));
  EXPECT_EQ(translate_output_names("dog.jpg", Direction::AToB), (std::vector<std::string>{"dog_fake.jpg"}));
  EXPECT_EQ(direction_from_string("b2a"), Direction::BToA);
  EXPECT_THROW(direction_from_string("sideways"), ArgumentError);
}

TEST(TrainCommandTest, WritesLogCheckpointsAndEffectiveConfig) {
  TempDir dir;
  testing::write_fixture_dataset(dir / "data", 2, 3, 16);
  const auto config = write_run_config(dir, dir / "data", 2);
  std::ostringstream log, err;
  ASSERT_EQ(cmd_train({config, {}, false, std::nullopt}, log, err), 0) << err.str();
  const auto run = dir / "run";
  EXPECT_EQ(read_loss_csv(run / kLossCsvName).size(), 6u);
  EXPECT_TRUE(fs::exists(run / kEffectiveConfigName));
  EXPECT_TRUE(fs::exists(run / kCheckpointDirName / "epoch_0001.ckpt"));
  EXPECT_TRUE(fs::exists(run / kCheckpointDirName / "epoch_0002.ckpt"));
  EXPECT_TRUE(fs::exists(run / kCheckpointDirName / kLatestCheckpointName));
  EXPECT_EQ(load_checkpoint(run / kFinalCheckpointName).epoch, 2);
}

TEST(TrainCommandTest, MissingDomainFolderIsDatasetError) {
  TempDir dir;
  testing::write_fixture_dataset(dir / "data", 2, 2, 16);
  fs::remove_all(dir / "data" / "trainA");
  const auto config = write_run_config(dir, dir / "data");
  std::ostringstream log, err;
  EXPECT_EQ(cmd_train({config, {}, false, std::nullopt}, log, err), static_cast<int>(ExitCode::Dataset));
  const std::string message = err.str();
  EXPECT_NE(message.find("trainA"), std::string::npos) << message;
  EXPECT_EQ(std::count(message.begin(), message.end(), '\n'), 1);
}

TEST(TrainCommandTest, BadConfigIsConfigError) {
  TempDir dir;
  std::ofstream(dir / "bad.yaml") << "lambda_cyc: -1\n";
  std::ostringstream log, err;
  EXPECT_EQ(cmd_train({dir / "bad.yaml", {}, false, std::nullopt}, log, err), static_cast<int>(ExitCode::Config));
  EXPECT_NE(err.str().find("lambda_cyc"), std::string::npos);
  std::ofstream(dir / "no_data.yaml") << "seed: 1\n";
  EXPECT_EQ(cmd_train({dir / "no_data.yaml", {}, false, std::nullopt}, log, err),
            static_cast<int>(ExitCode::Config));
}

TEST(TrainCommandTest, ResumeRejectsChangedConfig) {
  TempDir dir;
  testing::write_fixture_dataset(dir / "data", 1, 1, 16);
  const auto config = write_run_config(dir, dir / "data", 2);
  std::ostringstream log, err;
  ASSERT_EQ(cmd_train({config, {}, false, 1}, log, err), 0) << err.str();
  EXPECT_EQ(cmd_train({config, {"lambda_cyc=3"}, true, std::nullopt}, log, err),
            static_cast<int>(ExitCode::Checkpoint));
}

TEST(TranslateCommandTest, CycleModeWritesTriples) {
  TempDir dir;
  testing::write_fixture_dataset(dir / "data", 1, 1, 16, 7, 3);
  const auto config = write_run_config(dir, dir / "data");
  std::ostringstream log, err;
  ASSERT_EQ(cmd_train({config, {}, false, std::nullopt}, log, err), 0) << err.str();
  const auto ckpt = dir / "run" / kFinalCheckpointName;
  ASSERT_EQ(cmd_translate({ckpt, dir / "data" / "testA", Direction::Cycle, dir / "out"}, log, err), 0) << err.str();
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "out")) ++files;
  EXPECT_EQ(files, 9);
  for (const char* suffix : {"_real.png", "_fake.png", "_rec.png"})
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string("a_002") + suffix)));
  ASSERT_EQ(cmd_translate({ckpt, dir / "data" / "testB", Direction::BToA, dir / "out_b"}, log, err), 0);
  EXPECT_TRUE(fs::exists(dir / "out_b" / "b_000_fake.png"));
  EXPECT_EQ(cmd_translate({dir / "nope.ckpt", dir / "data" / "testA", Direction::AToB, dir / "x"}, log, err),
            static_cast<int>(ExitCode::Checkpoint));
}

TEST(PlotLossesCommandTest, WritesFiguresAndReportsBadCsv) {
  TempDir dir;
  {
    std::ofstream csv(dir / "losses.csv");
    csv << loss_csv_header() << "\n0,0,1,1,0.5,0.5,12,0.3,0.3\n0,1,0.9,0.9,0.4,0.4,9.8,0.3,0.3\n";
  }
  std::ostringstream log, err;
  ASSERT_EQ(cmd_plot_losses({dir / "losses.csv", dir / "plots"}, log, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(dir / "plots" / kCyclePlotName));
  EXPECT_TRUE(fs::exists(dir / "plots" / kAdversarialPlotName));
  EXPECT_TRUE(fs::exists(dir / "plots" / kEpochMeansName));
  std::ofstream(dir / "bad.csv") << "garbage\n";
  EXPECT_EQ(cmd_plot_losses({dir / "bad.csv", dir / "plots"}, log, err), static_cast<int>(ExitCode::Io));
}

}  // namespace
}  // namespace cyclegan
