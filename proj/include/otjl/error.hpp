#pragma once

#include <stdexcept>
#include <string>

namespace otjl {

// Exit codes used by the command-line front end. Each exception family maps
// onto exactly one of them.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  data = 3,
  runtime = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::runtime; }
};

// Invalid run configuration, resource files or composition specs.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

// Malformed dataset, checkpoint or resource content.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Filesystem failures while persisting run artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string located(const std::string& file, std::size_t line, const std::string& what) {
  return file + ":" + std::to_string(line) + ": " + what;
}

}  // namespace otjl
