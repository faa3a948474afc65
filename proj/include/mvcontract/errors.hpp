#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvcontract {

/// Raised when an Euler-Maruyama path leaves the finite range.
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(std::size_t path, std::size_t step)
      : std::runtime_error("simulation diverged on path " + std::to_string(path) +
                           " at step " + std::to_string(step)),
        path_(path),
        step_(step) {}

  std::size_t path() const { return path_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t path_;
  std::size_t step_;
};

/// Raised by the backward coefficient integration when a coefficient
/// exceeds the configured bound (or becomes non-finite).
class RiccatiBlowUp : public std::runtime_error {
 public:
  explicit RiccatiBlowUp(double time)
      : std::runtime_error("riccati blow-up at t = " + std::to_string(time)), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// λ_P below the floor at which the optimal cash-flow is defined.
class DegenerateMultiplier : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// f_e vanishes somewhere along a path handed to the hidden-action FOC check.
class DegenerateSensitivity : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mvcontract
