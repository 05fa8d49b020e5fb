#pragma once

#include <stdexcept>
#include <string>

namespace cyclegan {

/// Base of every error the library raises. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid architecture spec or training configuration value.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Config file or override that could not be parsed into a TrainConfig.
class ParseError : public Error {
 public:
  /// line is 1-based; 0 means the key came from a command-line override, -1 that the
  /// offending value is a default with no source location.
  ParseError(std::string key_path, int line, const std::string& message);
  const std::string& key_path() const noexcept { return key_path_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_path_;
  int line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unsupported image/CSV content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(std::string component, const std::string& message);
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

class CheckpointError : public Error {
 public:
  enum class Kind { Io, Corrupt, ConfigMismatch };
  CheckpointError(Kind kind, const std::string& message);
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace cyclegan
