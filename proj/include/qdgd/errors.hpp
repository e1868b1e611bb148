#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qdgd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured constant (usually the gradient bound C) turned out to be too
/// small for the observed iterates. Carries the round and agent where the
/// quantizer range check tripped.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(std::size_t round, std::optional<std::size_t> agent,
                      std::size_t coordinate, double value, double range);

  std::size_t round() const { return round_; }
  std::optional<std::size_t> agent() const { return agent_; }
  std::size_t coordinate() const { return coordinate_; }
  double value() const { return value_; }
  double range() const { return range_; }

 private:
  std::size_t round_;
  std::optional<std::size_t> agent_;
  std::size_t coordinate_;
  double value_;
  double range_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : Error("invalid field " + field + ": " + reason) {}
};

}  // namespace qdgd
