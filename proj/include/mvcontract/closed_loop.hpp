#pragma once

#include <array>
#include <cstddef>

#include "mvcontract/riccati.hpp"
#include "mvcontract/timegrid.hpp"

namespace mvcontract {

/// Drift and diffusion of (x, R) with ē and s̄ substituted through the
/// ansatz:
///   drift_x = a·x + b²·p + b·s̄
///   drift_R = a·R − b²(P1 + P2) + λ_E·b²·p
///   diffusion = (σ, 0)
/// E-terms are read from the supplied mean trajectories. Times between grid
/// nodes use piecewise-linear coefficients and means.
class ClosedLoopField {
 public:
  ClosedLoopField(const RiccatiSolution& sol, const MeanTrajectories& means);

  const RiccatiSolution& solution() const { return *sol_; }
  const MeanTrajectories& means() const { return *means_; }

  struct Controls {
    double p = 0.0;
    double P1 = 0.0;
    double P2 = 0.0;
    double s = 0.0;  // s̄
    double e = 0.0;  // ē
  };

  /// Adjoint values and optimal controls at grid node k.
  Controls controls(std::size_t k, double x, double R) const;
  /// Same at an arbitrary t in [0, T].
  Controls controls_at(double t, double x, double R) const;

  std::array<double, 2> drift(std::size_t k, double x, double R) const;
  std::array<double, 2> drift_at(double t, double x, double R) const;
  std::array<double, 2> diffusion() const { return {sol_->params().sigma, 0.0}; }

  /// The field as a two-component SDE with labels (x, R).
  SdeSystem as_sde() const;

 private:
  Controls controls_from(const RiccatiSolution::Row& row, double mx, double mR, double x, double R) const;
  std::array<double, 2> drift_from(const Controls& c, double x, double R) const;

  const RiccatiSolution* sol_;
  const MeanTrajectories* means_;
};

/// Builds the field; throws std::invalid_argument when the grids differ.
/// Both arguments must outlive the field.
ClosedLoopField closed_loop_field(const RiccatiSolution& sol, const MeanTrajectories& means);

}  // namespace mvcontract
