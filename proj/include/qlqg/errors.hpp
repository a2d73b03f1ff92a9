#pragma once

#include <stdexcept>
#include <string>

namespace qlqg {

// Operands live on different grids or have incompatible shapes.
class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematical precondition failed: asymmetry beyond tolerance,
// spectrum outside the admissible range, non-invertible cost operator.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A time-stepping process left its stability envelope. `step` is the
// index of the offending time step.
class instability_error : public std::runtime_error {
 public:
  instability_error(const std::string& what, int step_index)
      : std::runtime_error(what + " (step " + std::to_string(step_index) + ")"),
        step(step_index) {}
  int step;
};

// Malformed configuration or input file. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qlqg
