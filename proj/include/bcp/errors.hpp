#pragma once

#include <stdexcept>
#include <string>

namespace bcp {

// A model whose transition rows or rewards fall outside their admissible range.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric invariant (inverse residual, non-negative quadratic form,
// non-negative sub-optimality) failed beyond its float slack.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace bcp
