#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "cyclegan/config_io.hpp"
#include "cyclegan/errors.hpp"
#include "test_support.hpp"

namespace cyclegan {
namespace {

ParseError parse_failure(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
  try {
    parse_run_settings(yaml, overrides);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ParseError for:\n" << yaml;
  return ParseError("", -1, "");
}

TEST(ParseConfigTest, EmptyDocumentGivesDefaults) {
  auto s = parse_run_settings("");
  EXPECT_EQ(s.train, TrainConfig{});
  EXPECT_FALSE(s.dataset_root.has_value());
}

TEST(ParseConfigTest, PresetExpandsSchedule) {
  auto s = parse_run_settings("preset: summer2winter\n");
  EXPECT_EQ(s.train.schedule, (ScheduleConfig{120, 230}));
  EXPECT_EQ(s.train.preset, Preset::Summer2Winter);
  EXPECT_EQ(s.train.optimizer.learning_rate, 0.0002);
}

TEST(ParseConfigTest, ExplicitScheduleOverridesPreset) {
  auto s = parse_run_settings("preset: maps\nschedule:\n  total_epochs: 400\n");
  EXPECT_EQ(s.train.schedule, (ScheduleConfig{150, 400}));
}

TEST(ParseConfigTest, ReadsNestedSections) {
  auto s = parse_run_settings(
      "seed: 12\n"
      "lambda_cyc: 5\n"
      "gan_mode: vanilla\n"
      "image_size: 64\n"
      "dataset_root: /data/maps\n"
      "output_dir: out\n"
      "optimizer:\n  learning_rate: 0.001\n"
      "generator:\n  n_residual_blocks: 9\n"
      "discriminator:\n  norm_kind: none\n");
  EXPECT_EQ(s.train.seed, 12u);
  EXPECT_EQ(s.train.lambda_cyc, 5.0);
  EXPECT_EQ(s.train.gan_mode, GanMode::Vanilla);
  EXPECT_EQ(s.train.image_size, 64);
  EXPECT_EQ(s.train.optimizer.learning_rate, 0.001);
  EXPECT_EQ(s.train.generator.n_residual_blocks, 9);
  EXPECT_EQ(s.train.discriminator.norm_kind, NormKind::None);
  EXPECT_EQ(s.dataset_root, std::filesystem::path("/data/maps"));
  EXPECT_EQ(s.output_dir, std::filesystem::path("out"));
}

TEST(ParseConfigTest, InvalidValueNamesKeyAndLine) {
  auto e = parse_failure("seed: 1\nlambda_cyc: -1\n");
  EXPECT_EQ(e.key_path(), "lambda_cyc");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("lambda_cyc"), std::string::npos);
}

TEST(ParseConfigTest, UnknownKeyRejectedWithLine) {
  auto e = parse_failure("seed: 1\ngenerator:\n  n_blocks: 9\n");
  EXPECT_EQ(e.key_path(), "generator.n_blocks");
  EXPECT_EQ(e.line(), 3);
  auto top = parse_failure("lamda_cyc: 10\n");
  EXPECT_EQ(top.key_path(), "lamda_cyc");
  EXPECT_EQ(top.line(), 1);
}

TEST(ParseConfigTest, TypeMismatchRejected) {
  EXPECT_EQ(parse_failure("seed: twelve\n").key_path(), "seed");
  EXPECT_EQ(parse_failure("buffer_capacity: 2.5\n").key_path(), "buffer_capacity");
  EXPECT_EQ(parse_failure("generator:\n  encoder_channels: 64\n").key_path(), "generator.encoder_channels");
  EXPECT_EQ(parse_failure("optimizer: 3\n").key_path(), "optimizer");
  EXPECT_EQ(parse_failure("gan_mode: wgan\n").key_path(), "gan_mode");
}

TEST(ParseConfigTest, InvariantViolationNamesNestedField) {
  auto e = parse_failure("generator:\n  decoder_channels: [128]\n");
  EXPECT_EQ(e.key_path().rfind("generator.decoder_channels", 0), 0u) << e.key_path();
}

TEST(ParseConfigTest, MalformedYamlReportsLine) {
  auto e = parse_failure("seed: 1\noptimizer: [unclosed\n");
  EXPECT_GT(e.line(), 0);
}

TEST(OverrideTest, DottedKeysApplyAfterFile) {
  auto s = parse_run_settings("lambda_cyc: 10\n", {"lambda_cyc=3.5", "generator.n_residual_blocks=2",
                                                  "schedule.constant_epochs=1", "schedule.total_epochs=4"});
  EXPECT_EQ(s.train.lambda_cyc, 3.5);
  EXPECT_EQ(s.train.generator.n_residual_blocks, 2);
  EXPECT_EQ(s.train.schedule, (ScheduleConfig{1, 4}));
}

TEST(OverrideTest, ListValuesAndErrors) {
  auto s = parse_run_settings("", {"discriminator.layer_channels=[8, 16]", "discriminator.strides=[2, 1]"});
  EXPECT_EQ(s.train.discriminator.layer_channels, (std::vector<int>{8, 16}));
  auto bad = parse_failure("", {"lambda_cyc=-2"});
  EXPECT_EQ(bad.key_path(), "lambda_cyc");
  EXPECT_EQ(bad.line(), 0);
  EXPECT_EQ(parse_failure("", {"no_equals_sign"}).line(), 0);
  EXPECT_EQ(parse_failure("", {"optimizer.lr=1"}).key_path(), "optimizer.lr");
}

TEST(EmitConfigTest, EchoIsIdempotent) {
  auto s = parse_run_settings("preset: vangogh2photo\nlambda_cyc: 7.25\nseed: 99\ndataset_root: d\noutput_dir: o\n"
                              "optimizer:\n  learning_rate: 0.00013\n  epsilon: 1e-7\n");
  const auto once = emit_config(s);
  auto reparsed = parse_run_settings(once);
  EXPECT_EQ(reparsed, s);
  EXPECT_EQ(emit_config(reparsed), once);
}

TEST(EmitConfigTest, EveryDoubleRoundTripsExactly) {
  RunSettings s;
  s.train.lambda_cyc = 0.1 + 0.2;
  s.train.optimizer.learning_rate = 1.0 / 3.0;
  s.train.discriminator.leaky_slope = 0.2000000000000001;
  s.output_dir = "runs";
  EXPECT_EQ(parse_run_settings(emit_config(s)).train, s.train);
}

TEST(ConfigFileTest, ReadsFileAndWritesEffectiveConfig) {
  testing::TempDir dir;
  {
    std::ofstream(dir / "run.yaml") << "seed: 4\noutput_dir: " << (dir / "out").string() << "\n";
  }
  auto s = parse_run_settings_file(dir / "run.yaml", {"image_size=128"});
  EXPECT_EQ(s.train.seed, 4u);
  EXPECT_EQ(parse_config(dir / "run.yaml").seed, 4u);
  auto written = write_effective_config(s, dir / "out");
  EXPECT_EQ(written, dir / "out" / kEffectiveConfigName);
  EXPECT_EQ(parse_run_settings_file(written), s);
  EXPECT_THROW(parse_run_settings_file(dir / "missing.yaml"), Error);
}

TEST(ConfigFileTest, OutputDirDefaultsToEnvironment) {
  ::setenv(kOutputRootEnv, "/tmp/cyclegan-env-root", 1);
  EXPECT_EQ(parse_run_settings("").output_dir, std::filesystem::path("/tmp/cyclegan-env-root"));
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(parse_run_settings("").output_dir, std::filesystem::path("runs"));
}

}  // namespace
}  // namespace cyclegan
