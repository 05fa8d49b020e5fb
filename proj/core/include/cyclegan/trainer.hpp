#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>

#include <torch/torch.h>

#include "cyclegan/checkpoint.hpp"
#include "cyclegan/data.hpp"
#include "cyclegan/losses.hpp"
#include "cyclegan/models.hpp"
#include "cyclegan/replay_buffer.hpp"
#include "cyclegan/train_config.hpp"

namespace cyclegan {

/// G: X -> Y, F: Y -> X, and the discriminators for each domain. Domain X is the dataset's
/// "A" side, Y its "B" side.
struct Networks {
  NetworkHandle g_xy;
  NetworkHandle f_yx;
  NetworkHandle d_x;
  NetworkHandle d_y;

  static Networks build(const TrainConfig& config);
};

struct GeneratorStepResult {
  LossReport report;  ///< generator fields only
  torch::Tensor fake_x;  ///< F(y), detached, (1, C, H, W)
  torch::Tensor fake_y;  ///< G(x), detached, (1, C, H, W)
};

struct TrainHooks {
  std::function<void(const LossReport&)> on_report;
  std::function<void(const CheckpointState&)> on_checkpoint;
  /// Stop after this many epochs in this call, even if the schedule has more.
  std::optional<int> max_epochs;
};

/// Owns the four networks, their Adam optimizers, both replay buffers, and the counters of
/// one training run.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);
  /// Restores networks, optimizer moments, buffers, counters and rng from a checkpoint.
  explicit Trainer(const CheckpointState& state);

  Trainer(Trainer&&) noexcept = default;
  Trainer& operator=(Trainer&&) noexcept = default;

  /// Joint update of G and F on the adversarial + lambda * cycle objective. Discriminator
  /// parameters are left untouched.
  GeneratorStepResult generator_step(const Sample& sample);

  /// Separate updates of D_x (real x vs buffered F(y)) and D_y (real y vs buffered G(x)).
  /// Returns a report with only the discriminator fields set.
  LossReport discriminator_step(const Sample& sample, const torch::Tensor& fake_x, const torch::Tensor& fake_y);

  /// generator_step followed by discriminator_step; does not advance the counters.
  LossReport train_iteration(const Sample& sample);

  /// Runs epochs from the current one up to schedule.total_epochs (or hooks.max_epochs more),
  /// emitting one report per iteration and checkpoints every checkpoint_every epochs and at
  /// the end of the schedule.
  CheckpointState train(const UnpairedDataset& dataset, const TrainHooks& hooks = {});

  CheckpointState state() const;

  void set_learning_rate(double lr);
  double learning_rate() const;

  const TrainConfig& config() const noexcept { return config_; }
  const Networks& networks() const noexcept { return nets_; }
  ReplayBuffer& buffer_x() noexcept { return buffer_x_; }
  ReplayBuffer& buffer_y() noexcept { return buffer_y_; }
  int64_t epoch() const noexcept { return epoch_; }
  int64_t iteration() const noexcept { return iteration_; }

 private:
  void make_optimizers();

  TrainConfig config_;
  Networks nets_;
  std::unique_ptr<torch::optim::Adam> opt_g_xy_;
  std::unique_ptr<torch::optim::Adam> opt_f_yx_;
  std::unique_ptr<torch::optim::Adam> opt_d_x_;
  std::unique_ptr<torch::optim::Adam> opt_d_y_;
  ReplayBuffer buffer_x_;
  ReplayBuffer buffer_y_;
  std::mt19937_64 rng_;
  int64_t epoch_ = 0;
  int64_t iteration_ = 0;
};

/// Rebuilds one network from a checkpoint (used for inference).
NetworkHandle restore_network(const CheckpointState& state, NetworkRole role);

/// Deterministic per-purpose seed derived from the run seed.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

}  // namespace cyclegan
