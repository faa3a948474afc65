#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mvcontract/numerics.hpp"
#include "mvcontract/timegrid.hpp"

namespace mvcontract {

/// Density-of-output paths Γ with Γ(0) = 1, stored as log Γ.
class DensityEnsemble {
 public:
  DensityEnsemble(TimeGrid grid, std::size_t n_paths);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }

  double log_gamma(std::size_t path, std::size_t step) const { return log_gamma_[path * grid_.n_points() + step]; }
  double gamma(std::size_t path, std::size_t step) const;
  /// Γ(T) for every path.
  std::vector<double> terminal() const;
  std::vector<double> terminal_log() const;

  std::span<double> path_log(std::size_t path) {
    return {log_gamma_.data() + path * grid_.n_points(), grid_.n_points()};
  }

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::vector<double> log_gamma_;
};

/// θ(t, x) = f(t, x, e(t))/σ(t, x) along the output path.
using IntensityFn = std::function<double(double t, double x)>;

/// Discrete stochastic exponential driven by the same increments as x_paths:
///   log Γ_{k+1} = log Γ_k + θ_k·ΔW_k − θ_k²·Δt/2,  θ_k = θ(t_k, x_k).
/// `noise` must be the ensemble that drove x_paths (component 0 is x).
/// Throws std::invalid_argument on a non-finite θ_k or mismatched inputs.
DensityEnsemble simulate_density(const IntensityFn& theta, const NoiseEnsemble& noise, const PathEnsemble& x_paths,
                                 unsigned workers = 0);

/// Sample mean of Γ(T)·payoff with its standard error, i.e. E^e[payoff].
Estimate reweighted_expectation(std::span<const double> payoff, std::span<const double> gamma_T);

/// Candidate (x, ē, s, q) along one path for the first-order condition
///   q = σ·u_e(t, x, ē, s)/f_e(t, x, ē).
struct FocInputs {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> e;
  std::vector<double> s;
  std::vector<double> q;
  std::vector<double> sigma;
  std::function<double(double t, double x, double e, double s)> u_e;
  std::function<double(double t, double x, double e)> f_e;
};

struct FocReport {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t n_points = 0;
};

/// Pointwise |q − σ·u_e/f_e|. Throws DegenerateSensitivity when |f_e| < 1e-12
/// anywhere and std::invalid_argument on length mismatches.
FocReport hidden_action_foc_check(const FocInputs& inputs);

}  // namespace mvcontract
