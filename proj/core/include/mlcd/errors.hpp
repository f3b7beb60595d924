#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlcd {

// Malformed edge-list or label input. what() carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input is well-formed but numerically unusable (rank deficiency, zero norms).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mlcd
