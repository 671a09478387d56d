#pragma once

#include <stdexcept>
#include <string>

namespace emsrl {

// Base for every recoverable error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class NonUniformTimestep : public Error {
 public:
  using Error::Error;
};

class NegativeSpeed : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

// Fuel-cell command outside [0, max_power].
class PowerOutOfRange : public Error {
 public:
  using Error::Error;
};

// Battery cannot deliver the requested power (negative discriminant).
class PowerInfeasible : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

class EmptyCurve : public Error {
 public:
  using Error::Error;
};

class MissingCell : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid or out-of-range configuration value. `key` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A referenced data file is missing or malformed.
class DataFileError : public Error {
 public:
  DataFileError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace emsrl
