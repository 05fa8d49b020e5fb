#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cyclegan/train_config.hpp"

namespace cyclegan {

/// Environment variable naming the default output root when a config sets no output_dir.
inline constexpr const char* kOutputRootEnv = "CYCLEGAN_OUTPUT_ROOT";
inline constexpr const char* kEffectiveConfigName = "effective_config.yaml";

/// A run configuration file: the training settings plus where data comes from and goes to.
struct RunSettings {
  TrainConfig train;
  std::optional<std::filesystem::path> dataset_root;
  std::filesystem::path output_dir;

  bool operator==(const RunSettings&) const = default;
};

/// Parses YAML text, applies `key.path=value` overrides, expands the preset and validates.
///
/// Unknown keys, type mismatches and invariant violations raise ParseError carrying the
/// dotted key path and the 1-based line (0 for keys set by an override).
RunSettings parse_run_settings(const std::string& yaml_text, const std::vector<std::string>& overrides = {});
RunSettings parse_run_settings_file(const std::filesystem::path& file,
                                    const std::vector<std::string>& overrides = {});

/// The TrainConfig part of parse_run_settings_file.
TrainConfig parse_config(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

/// Full effective configuration as YAML; parsing it back yields identical settings.
std::string emit_config(const RunSettings& settings);
std::string emit_config(const TrainConfig& config);

/// Writes emit_config(settings) to <dir>/effective_config.yaml and returns the path.
std::filesystem::path write_effective_config(const RunSettings& settings, const std::filesystem::path& dir);

}  // namespace cyclegan
