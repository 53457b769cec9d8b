#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acsense {

// Rejected argument or configuration value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Observation has zero probability under the predicted belief.
class DegenerateEvidence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite value reached a parameter update.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Belief drifted from unit mass beyond tolerance.
class InternalConsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace acsense
