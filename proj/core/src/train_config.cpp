#include "cyclegan/train_config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cyclegan/errors.hpp"
#include "fnv.hpp"

namespace cyclegan {

namespace {

std::string exact(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string list(const std::vector<int>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

template <class Spec>
void validate_nested(const Spec& spec, const std::string& prefix) {
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    std::string message = e.what();
    const std::string lead = e.field() + ": ";
    if (message.rfind(lead, 0) == 0) message = message.substr(lead.size());
    throw ConfigError(prefix + "." + e.field(), message);
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer.learning_rate", "must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optimizer.beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer.beta2", "must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer.epsilon", "must be > 0");
}

void ScheduleConfig::validate() const {
  if (total_epochs <= 0) throw ConfigError("schedule.total_epochs", "must be positive");
  if (constant_epochs < 0) throw ConfigError("schedule.constant_epochs", "must be >= 0");
  if (constant_epochs > total_epochs)
    throw ConfigError("schedule.constant_epochs", "must not exceed schedule.total_epochs");
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::Maps: return "maps";
    case Preset::Vangogh2Photo: return "vangogh2photo";
    case Preset::Summer2Winter: return "summer2winter";
  }
  return "unknown";
}

Preset preset_from_string(std::string_view text) {
  if (text == "maps") return Preset::Maps;
  if (text == "vangogh2photo") return Preset::Vangogh2Photo;
  if (text == "summer2winter") return Preset::Summer2Winter;
  throw ConfigError("preset", "expected one of maps, vangogh2photo, summer2winter; got '" + std::string(text) + "'");
}

ScheduleConfig preset_schedule(Preset preset) {
  switch (preset) {
    case Preset::Maps: return {150, 315};
    case Preset::Vangogh2Photo: return {150, 230};
    case Preset::Summer2Winter: return {120, 230};
  }
  return {};
}

void TrainConfig::validate() const {
  optimizer.validate();
  schedule.validate();
  if (!(lambda_cyc >= 0.0) || !std::isfinite(lambda_cyc)) throw ConfigError("lambda_cyc", "must be finite and >= 0");
  if (buffer_capacity < 0) throw ConfigError("buffer_capacity", "must be >= 0");
  if (batch_size != 1) throw ConfigError("batch_size", "only batch size 1 is supported (instance normalization)");
  if (checkpoint_every <= 0) throw ConfigError("checkpoint_every", "must be positive");
  if (image_size <= 0) throw ConfigError("image_size", "must be positive");
  validate_nested(generator, "generator");
  validate_nested(discriminator, "discriminator");
  if (generator.in_channels != 3 || generator.out_channels != 3)
    throw ConfigError("generator.in_channels", "image translation works on 3-channel RGB images");
  if (discriminator.in_channels != generator.out_channels)
    throw ConfigError("discriminator.in_channels", "must equal generator.out_channels");
  const int factor = 1 << generator.downsampling_stages();
  if (image_size % factor != 0 || image_size / factor < 2)
    throw ConfigError("image_size", "must be a multiple of " + std::to_string(factor) +
                                        " and leave a bottleneck of at least 2x2");
  try {
    discriminator_output_size(discriminator, image_size, image_size);
  } catch (const ShapeError& e) {
    throw ConfigError("image_size", std::string("too small for the discriminator: ") + e.what());
  }
}

std::string canonical_string(const TrainConfig& c) {
  std::ostringstream out;
  out << "optimizer.learning_rate=" << exact(c.optimizer.learning_rate) << "\n"
      << "optimizer.beta1=" << exact(c.optimizer.beta1) << "\n"
      << "optimizer.beta2=" << exact(c.optimizer.beta2) << "\n"
      << "optimizer.epsilon=" << exact(c.optimizer.epsilon) << "\n"
      << "lambda_cyc=" << exact(c.lambda_cyc) << "\n"
      << "gan_mode=" << to_string(c.gan_mode) << "\n"
      << "buffer_capacity=" << c.buffer_capacity << "\n"
      << "batch_size=" << c.batch_size << "\n"
      << "schedule.constant_epochs=" << c.schedule.constant_epochs << "\n"
      << "schedule.total_epochs=" << c.schedule.total_epochs << "\n"
      << "seed=" << c.seed << "\n"
      << "image_size=" << c.image_size << "\n"
      << "generator.in_channels=" << c.generator.in_channels << "\n"
      << "generator.encoder_channels=" << list(c.generator.encoder_channels) << "\n"
      << "generator.n_residual_blocks=" << c.generator.n_residual_blocks << "\n"
      << "generator.decoder_channels=" << list(c.generator.decoder_channels) << "\n"
      << "generator.out_channels=" << c.generator.out_channels << "\n"
      << "generator.norm_kind=" << to_string(c.generator.norm_kind) << "\n"
      << "discriminator.in_channels=" << c.discriminator.in_channels << "\n"
      << "discriminator.layer_channels=" << list(c.discriminator.layer_channels) << "\n"
      << "discriminator.kernel_size=" << c.discriminator.kernel_size << "\n"
      << "discriminator.strides=" << list(c.discriminator.strides) << "\n"
      << "discriminator.final_stride=" << c.discriminator.final_stride << "\n"
      << "discriminator.leaky_slope=" << exact(c.discriminator.leaky_slope) << "\n"
      << "discriminator.norm_kind=" << to_string(c.discriminator.norm_kind) << "\n";
  return out.str();
}

uint64_t fingerprint(const TrainConfig& config) {
  return detail::fnv1a64(canonical_string(config));
}

double lr_at(const ScheduleConfig& schedule, double base_lr, int epoch) {
  if (epoch < 0 || epoch >= schedule.total_epochs)
    throw RangeError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                     std::to_string(schedule.total_epochs) + ")");
  if (epoch < schedule.constant_epochs) return base_lr;
  return base_lr * static_cast<double>(schedule.total_epochs - epoch) /
         static_cast<double>(schedule.total_epochs - schedule.constant_epochs);
}

}  // namespace cyclegan
