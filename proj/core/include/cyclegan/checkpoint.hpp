#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "cyclegan/replay_buffer.hpp"
#include "cyclegan/train_config.hpp"

namespace cyclegan {

inline constexpr uint32_t kCheckpointFormatVersion = 1;

/// Everything needed to continue a run exactly where it stopped.
struct CheckpointState {
  TrainConfig config;
  /// "<role>/<parameter name>" -> tensor, e.g. "g_xy/stem.weight".
  std::map<std::string, torch::Tensor> parameters;
  /// role -> serialized Adam state.
  std::map<std::string, std::string> optimizer_states;
  ReplayBufferSnapshot buffer_x;
  ReplayBufferSnapshot buffer_y;
  /// Number of completed epochs.
  int64_t epoch = 0;
  /// Number of completed iterations.
  int64_t iteration = 0;
  /// Engine that draws per-epoch shuffling seeds.
  std::string rng_state;
  uint64_t config_fingerprint = 0;
};

/// Layout: magic "CYGANCKP", u32 format version, u64 manifest length, JSON manifest,
/// blob bytes, u64 FNV-1a checksum of everything before it. Integers are little-endian.
/// The manifest records the config, counters, rng states and a table of named blobs with
/// their offsets, sizes, dtypes and shapes.
void save_checkpoint(const CheckpointState& state, const std::filesystem::path& path);

/// Throws CheckpointError(Io) for unreadable files, CheckpointError(Corrupt) for damaged
/// or foreign content.
CheckpointState load_checkpoint(const std::filesystem::path& path);

/// As above, and additionally CheckpointError(ConfigMismatch) when the stored config
/// fingerprint differs from fingerprint(expected).
CheckpointState load_checkpoint(const std::filesystem::path& path, const TrainConfig& expected);

}  // namespace cyclegan
