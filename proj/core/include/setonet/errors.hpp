#pragma once

#include <stdexcept>
#include <string>

namespace setonet {

// Exit codes surfaced by the command-line tool.
enum class ExitCode : int { ok = 0, validation = 2, numerical = 3, io = 4 };

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

// Raised when a dataset bundle or its sidecar is malformed.
class DatasetError : public IoError {
public:
  enum class Kind { missing_file, bad_magic, version_mismatch, checksum, missing_key, shape };

  DatasetError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

#define SETONET_REQUIRE(cond, msg)                                   \
  do {                                                               \
    if (!(cond)) throw ::setonet::ValidationError(msg);              \
  } while (0)

}  // namespace setonet
