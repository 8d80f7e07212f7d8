#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msbm {

/// Caller violated a documented precondition (bad dimensions, ranks, ids...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. `location` is a byte offset for binary inputs and a
/// 1-based line number for text inputs.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t location)
      : std::runtime_error(what), location_(location) {}
  std::uint64_t location() const noexcept { return location_; }

 private:
  std::uint64_t location_;
};

/// No candidate tolerance constant met the acceptance level; the grid
/// has to be enlarged.
class CalibrationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msbm
