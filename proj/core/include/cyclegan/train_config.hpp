#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cyclegan/losses.hpp"
#include "cyclegan/models.hpp"

namespace cyclegan {

/// Adam settings shared by all four networks (each keeps its own moment estimates).
struct OptimizerConfig {
  double learning_rate = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

/// Constant learning rate for `constant_epochs`, then a linear ramp reaching zero at `total_epochs`.
struct ScheduleConfig {
  int constant_epochs = 100;
  int total_epochs = 200;

  void validate() const;
  bool operator==(const ScheduleConfig&) const = default;
};

enum class Preset { Maps, Vangogh2Photo, Summer2Winter };

std::string_view to_string(Preset preset);
Preset preset_from_string(std::string_view text);

/// maps -> (150, 315), vangogh2photo -> (150, 230), summer2winter -> (120, 230).
ScheduleConfig preset_schedule(Preset preset);

struct TrainConfig {
  OptimizerConfig optimizer;
  double lambda_cyc = 10.0;
  GanMode gan_mode = GanMode::Lsgan;
  int buffer_capacity = 50;
  int batch_size = 1;
  ScheduleConfig schedule;
  uint64_t seed = 0;
  int checkpoint_every = 1;
  std::optional<Preset> preset;
  int image_size = 256;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;

  /// Throws ConfigError whose field is the dotted key path of the offending value.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Stable key=value listing of every setting that affects the training trajectory.
/// checkpoint_every and the preset name are excluded (the preset is already expanded).
std::string canonical_string(const TrainConfig& config);

/// FNV-1a 64 of canonical_string().
uint64_t fingerprint(const TrainConfig& config);

/// Learning rate for a 0-based epoch. Throws RangeError outside [0, total_epochs).
double lr_at(const ScheduleConfig& schedule, double base_lr, int epoch);

}  // namespace cyclegan
