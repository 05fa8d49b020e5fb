#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace cyclegan {

/// Serializable state of a ReplayBuffer, including its random engine.
struct ReplayBufferSnapshot {
  int capacity = 0;
  std::vector<torch::Tensor> pool;
  std::string rng_state;
};

/// Bounded history of generated images shown to a discriminator in place of the newest fake.
///
/// Until the pool is full every incoming image is stored and passed through. Once full, each
/// incoming image is swapped with a uniformly chosen stored image with probability 0.5
/// (the stored one is returned), otherwise it is returned as-is and not stored.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity = 50, uint64_t seed = 0);

  /// `fresh` is an (N, C, H, W) batch; the result has the same shape, is detached, and
  /// shares no storage with the pool.
  torch::Tensor query(const torch::Tensor& fresh);

  int capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return pool_.size(); }
  const std::vector<torch::Tensor>& pool() const noexcept { return pool_; }

  ReplayBufferSnapshot snapshot() const;
  static ReplayBuffer restore(const ReplayBufferSnapshot& snapshot);

 private:
  int capacity_;
  std::vector<torch::Tensor> pool_;
  std::mt19937_64 rng_;
};

}  // namespace cyclegan
