#include "cyclegan/errors.hpp"

#include <utility>

namespace cyclegan {

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field + ": " + message), field_(std::move(field)) {}

ParseError::ParseError(std::string key_path, int line, const std::string& message)
    : Error((line > 0    ? "line " + std::to_string(line) + ": "
             : line == 0 ? std::string("override: ")
                         : std::string()) +
            key_path + ": " + message),
      key_path_(std::move(key_path)),
      line_(line) {}

TrainingError::TrainingError(std::string component, const std::string& message)
    : Error(component + ": " + message), component_(std::move(component)) {}

CheckpointError::CheckpointError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

}  // namespace cyclegan
