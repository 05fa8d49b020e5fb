#include "cyclegan/replay_buffer.hpp"

#include <sstream>

#include "cyclegan/errors.hpp"

namespace cyclegan {

ReplayBuffer::ReplayBuffer(int capacity, uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity < 0) throw ConfigError("buffer_capacity", "must be >= 0");
  pool_.reserve(static_cast<std::size_t>(capacity));
}

torch::Tensor ReplayBuffer::query(const torch::Tensor& fresh) {
  if (fresh.dim() != 4) throw ArgumentError("ReplayBuffer::query: expected an (N, C, H, W) batch");
  auto incoming = fresh.detach();
  if (capacity_ == 0) return incoming.clone();
  if (!pool_.empty() && !pool_.front().sizes().equals(incoming.sizes().slice(1))) {
    std::ostringstream msg;
    msg << "ReplayBuffer::query: image shape " << incoming.sizes().slice(1) << " does not match pooled shape "
        << pool_.front().sizes();
    throw ArgumentError(msg.str());
  }

  std::vector<torch::Tensor> out;
  out.reserve(static_cast<std::size_t>(incoming.size(0)));
  for (int64_t i = 0; i < incoming.size(0); ++i) {
    auto image = incoming[i].clone();
    if (pool_.size() < static_cast<std::size_t>(capacity_)) {
      pool_.push_back(image.clone());
      out.push_back(image);
      continue;
    }
    if (std::bernoulli_distribution(0.5)(rng_)) {
      std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
      auto& slot = pool_[pick(rng_)];
      out.push_back(slot);
      slot = image.clone();
    } else {
      out.push_back(image);
    }
  }
  return torch::stack(out);
}

ReplayBufferSnapshot ReplayBuffer::snapshot() const {
  ReplayBufferSnapshot snap;
  snap.capacity = capacity_;
  snap.pool.reserve(pool_.size());
  for (const auto& t : pool_) snap.pool.push_back(t.clone());
  std::ostringstream state;
  state << rng_;
  snap.rng_state = state.str();
  return snap;
}

ReplayBuffer ReplayBuffer::restore(const ReplayBufferSnapshot& snapshot) {
  ReplayBuffer buffer(snapshot.capacity);
  if (snapshot.pool.size() > static_cast<std::size_t>(snapshot.capacity))
    throw ArgumentError("ReplayBuffer::restore: pool larger than capacity");
  for (const auto& t : snapshot.pool) buffer.pool_.push_back(t.clone());
  if (!snapshot.rng_state.empty()) {
    std::istringstream state(snapshot.rng_state);
    state >> buffer.rng_;
    if (state.fail()) throw ArgumentError("ReplayBuffer::restore: malformed rng state");
  }
  return buffer;
}

}  // namespace cyclegan
