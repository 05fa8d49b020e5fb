#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cyclegan {

/// One exit code per error class.
enum class ExitCode : int {
  Ok = 0,
  Internal = 1,
  Usage = 2,
  Config = 3,
  Dataset = 4,
  Training = 5,
  Checkpoint = 6,
  Io = 7,
  Shape = 8,
};

ExitCode exit_code_for(const std::exception& error);

struct TrainCommand {
  std::filesystem::path config_path;
  std::vector<std::string> overrides;
  bool resume = false;
  /// Stop after this many epochs in this invocation.
  std::optional<int> max_epochs;
};

enum class Direction { AToB, BToA, Cycle };

Direction direction_from_string(std::string_view text);

struct TranslateCommand {
  std::filesystem::path checkpoint;
  std::filesystem::path input_dir;
  Direction direction = Direction::AToB;
  std::filesystem::path output_dir;
};

struct PlotLossesCommand {
  std::filesystem::path csv;
  std::filesystem::path out_dir;
};

inline constexpr const char* kCheckpointDirName = "checkpoints";
inline constexpr const char* kLatestCheckpointName = "latest.ckpt";
inline constexpr const char* kFinalCheckpointName = "final.ckpt";

/// Output file names for one input, in real / fake / reconstructed order. a2b and b2a write
/// only the translation; cycle writes all three.
std::vector<std::string> translate_output_names(const std::filesystem::path& input, Direction direction);

/// Each command returns an exit status and reports failures as one line on `err`.
int cmd_train(const TrainCommand& cmd, std::ostream& log, std::ostream& err);
int cmd_translate(const TranslateCommand& cmd, std::ostream& log, std::ostream& err);
int cmd_plot_losses(const PlotLossesCommand& cmd, std::ostream& log, std::ostream& err);

}  // namespace cyclegan
