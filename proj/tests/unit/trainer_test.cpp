#include <gtest/gtest.h>

#include <set>

#include "cyclegan/errors.hpp"
#include "cyclegan/trainer.hpp"
#include "test_support.hpp"

namespace cyclegan {
namespace {

using testing::TempDir;

std::vector<torch::Tensor> snapshot(const NetworkHandle& net) {
  std::vector<torch::Tensor> out;
  for (const auto& p : net.parameters()) out.push_back(p.detach().clone());
  return out;
}

bool unchanged(const NetworkHandle& net, const std::vector<torch::Tensor>& before) {
  const auto now = net.parameters();
  for (std::size_t i = 0; i < now.size(); ++i)
    if (!torch::equal(now[i], before[i])) return false;
  return true;
}

Sample random_sample(int size, uint64_t seed) {
  auto gen = at::detail::createCPUGenerator(seed);
  return Sample{torch::rand({3, size, size}, gen) * 2 - 1, torch::rand({3, size, size}, gen) * 2 - 1, 0, 0};
}

double identity_gap(const LossReport& r, double lambda) {
  return std::abs(r.total_generator - (r.g_xy_adv + r.g_yx_adv + lambda * (r.cycle_forward + r.cycle_backward)));
}

TEST(TrainerTest, GeneratorStepLeavesDiscriminatorsUntouched) {
  Trainer trainer(testing::tiny_config(16));
  const auto dx = snapshot(trainer.networks().d_x);
  const auto dy = snapshot(trainer.networks().d_y);
  const auto g = snapshot(trainer.networks().g_xy);
  auto result = trainer.generator_step(random_sample(16, 1));
  EXPECT_TRUE(unchanged(trainer.networks().d_x, dx));
  EXPECT_TRUE(unchanged(trainer.networks().d_y, dy));
  EXPECT_FALSE(unchanged(trainer.networks().g_xy, g));
  EXPECT_EQ(result.fake_y.sizes(), (std::vector<int64_t>{1, 3, 16, 16}));
  EXPECT_FALSE(result.fake_x.requires_grad());
  for (const auto& p : trainer.networks().d_x.parameters()) EXPECT_TRUE(p.requires_grad());
}

TEST(TrainerTest, DiscriminatorStepLeavesGeneratorsUntouched) {
  Trainer trainer(testing::tiny_config(16));
  const auto sample = random_sample(16, 2);
  auto result = trainer.generator_step(sample);
  const auto g = snapshot(trainer.networks().g_xy);
  const auto f = snapshot(trainer.networks().f_yx);
  const auto dx = snapshot(trainer.networks().d_x);
  const auto dy = snapshot(trainer.networks().d_y);
  auto report = trainer.discriminator_step(sample, result.fake_x, result.fake_y);
  EXPECT_TRUE(unchanged(trainer.networks().g_xy, g));
  EXPECT_TRUE(unchanged(trainer.networks().f_yx, f));
  EXPECT_FALSE(unchanged(trainer.networks().d_x, dx));
  EXPECT_FALSE(unchanged(trainer.networks().d_y, dy));
  EXPECT_GT(report.d_x_total, 0.0);
  EXPECT_GT(report.d_y_total, 0.0);
  EXPECT_TRUE(std::isfinite(report.d_x_total));
}

TEST(TrainerTest, BookkeepingIdentityHolds) {
  for (double lambda : {10.0, 0.0, 2.5}) {
    auto config = testing::tiny_config(16);
    config.lambda_cyc = lambda;
    Trainer trainer(config);
    for (int i = 0; i < 5; ++i) {
      auto r = trainer.train_iteration(random_sample(16, 10 + i));
      EXPECT_LE(identity_gap(r, lambda), 1e-6);
      EXPECT_GT(r.cycle_forward, 0.0);
    }
  }
}

TEST(TrainerTest, RepeatedGeneratorStepsReduceCycleLoss) {
  auto config = testing::tiny_config(32);
  Trainer trainer(config);
  const auto sample = random_sample(32, 3);
  const auto dx = snapshot(trainer.networks().d_x);
  const double initial = trainer.generator_step(sample).report.cycle_forward;
  double last = initial;
  for (int i = 1; i < 200; ++i) last = trainer.generator_step(sample).report.cycle_forward;
  EXPECT_LT(last, initial);
  EXPECT_TRUE(unchanged(trainer.networks().d_x, dx));
}

TEST(TrainerTest, BufferGrowsByOnePerIterationUntilFull) {
  auto config = testing::tiny_config(16);
  config.buffer_capacity = 6;
  Trainer trainer(config);
  for (int i = 0; i < 10; ++i) {
    trainer.train_iteration(random_sample(16, 20 + i));
    EXPECT_EQ(trainer.buffer_x().size(), static_cast<std::size_t>(std::min(i + 1, 6)));
    EXPECT_EQ(trainer.buffer_y().size(), static_cast<std::size_t>(std::min(i + 1, 6)));
  }
}

TEST(TrainerTest, NonFiniteLossNamesComponent) {
  Trainer trainer(testing::tiny_config(16));
  auto sample = random_sample(16, 4);
  sample.image_a[0][0][0] = std::numeric_limits<float>::quiet_NaN();
  try {
    trainer.generator_step(sample);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_FALSE(e.component().empty());
  }
}

TEST(TrainerTest, LearningRateFollowsSchedule) {
  TempDir dir;
  testing::write_fixture_dataset(dir.path(), 1, 1, 16);
  auto config = testing::tiny_config(16);
  config.schedule = {1, 3};
  Trainer trainer(config);
  std::vector<double> rates;
  TrainHooks hooks;
  hooks.on_report = [&](const LossReport&) { rates.push_back(trainer.learning_rate()); };
  trainer.train(load_dataset(dir.path(), Split::Train, 16), hooks);
  ASSERT_EQ(rates.size(), 3u);
  EXPECT_DOUBLE_EQ(rates[0], config.optimizer.learning_rate);
  EXPECT_DOUBLE_EQ(rates[1], config.optimizer.learning_rate);
  EXPECT_DOUBLE_EQ(rates[2], config.optimizer.learning_rate / 2);
}

TEST(TrainerTest, EpochsEmitMaxDomainRowsWithCounters) {
  TempDir dir;
  testing::write_fixture_dataset(dir.path(), 3, 2, 16);
  auto config = testing::tiny_config(16);
  config.checkpoint_every = 2;
  Trainer trainer(config);
  std::vector<LossReport> rows;
  std::vector<int64_t> checkpoints;
  TrainHooks hooks;
  hooks.on_report = [&](const LossReport& r) { rows.push_back(r); };
  hooks.on_checkpoint = [&](const CheckpointState& s) { checkpoints.push_back(s.epoch); };
  hooks.max_epochs = 2;
  auto state = trainer.train(load_dataset(dir.path(), Split::Train, 16), hooks);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].iteration, static_cast<int64_t>(i));
    EXPECT_EQ(rows[i].epoch, static_cast<int64_t>(i / 3));
    EXPECT_LE(identity_gap(rows[i], config.lambda_cyc), 1e-6);
  }
  EXPECT_EQ(state.epoch, 2);
  EXPECT_EQ(state.iteration, 6);
  EXPECT_EQ(checkpoints, (std::vector<int64_t>{2}));
}

std::vector<LossReport> run(const UnpairedDataset& ds, const TrainConfig& config) {
  Trainer trainer(config);
  std::vector<LossReport> rows;
  TrainHooks hooks;
  hooks.on_report = [&](const LossReport& r) { rows.push_back(r); };
  trainer.train(ds, hooks);
  return rows;
}

TEST(TrainerTest, SeededRunsAreIdentical) {
  TempDir dir;
  testing::write_fixture_dataset(dir.path(), 2, 3, 16);
  const auto ds = load_dataset(dir.path(), Split::Train, 16);
  const auto config = testing::tiny_config(16);
  EXPECT_EQ(run(ds, config), run(ds, config));
  auto reseeded = config;
  reseeded.seed = config.seed + 1;
  EXPECT_NE(run(ds, config), run(ds, reseeded));
}

TEST(TrainerTest, ResumeMatchesUninterruptedRun) {
  TempDir dir;
  testing::write_fixture_dataset(dir.path(), 2, 3, 16);
  const auto ds = load_dataset(dir.path(), Split::Train, 16);
  const auto config = testing::tiny_config(16);
  const auto straight = run(ds, config);
  ASSERT_EQ(straight.size(), 9u);

  std::vector<LossReport> resumed;
  CheckpointState saved;
  {
    Trainer first(config);
    TrainHooks hooks;
    hooks.on_report = [&](const LossReport& r) { resumed.push_back(r); };
    hooks.max_epochs = 1;
    first.train(ds, hooks);
    save_checkpoint(first.state(), dir / "mid.ckpt");
  }
  Trainer second(load_checkpoint(dir / "mid.ckpt", config));
  EXPECT_EQ(second.epoch(), 1);
  TrainHooks hooks;
  hooks.on_report = [&](const LossReport& r) { resumed.push_back(r); };
  second.train(ds, hooks);
  EXPECT_EQ(resumed, straight);
}

TEST(TrainerTest, RestoreNetworkReproducesGenerator) {
  Trainer trainer(testing::tiny_config(16));
  trainer.train_iteration(random_sample(16, 5));
  const auto state = trainer.state();
  const auto g = restore_network(state, NetworkRole::GeneratorXY);
  const auto input = random_sample(16, 6).image_a.unsqueeze(0);
  torch::NoGradGuard no_grad;
  EXPECT_TRUE(torch::equal(g.forward(input), trainer.networks().g_xy.forward(input)));
}

TEST(DeriveSeedTest, DistinctStreams) {
  std::set<uint64_t> seen;
  for (uint64_t stream = 0; stream < 16; ++stream) seen.insert(derive_seed(0, stream));
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
  EXPECT_NE(derive_seed(5, 3), derive_seed(6, 3));
}

}  // namespace
}  // namespace cyclegan
