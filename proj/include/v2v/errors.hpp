#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace v2v {

class ScenarioInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Beamwidth product below the alignment-delay bound.
class ConstraintViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure during a simulation run; carries the transmission slot index.
class RunError : public std::runtime_error {
 public:
  RunError(std::int64_t slot, const std::string& what)
      : std::runtime_error("slot " + std::to_string(slot) + ": " + what), slot_(slot) {}
  std::int64_t slot() const { return slot_; }

 private:
  std::int64_t slot_;
};

}  // namespace v2v
