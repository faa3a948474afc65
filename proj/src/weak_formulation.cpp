#include "mvcontract/weak_formulation.hpp"

#include <cmath>
#include <stdexcept>

#include "mvcontract/errors.hpp"

namespace mvcontract {

DensityEnsemble::DensityEnsemble(TimeGrid grid, std::size_t n_paths)
    : grid_(grid), n_paths_(n_paths), log_gamma_(n_paths * grid.n_points(), 0.0) {}

double DensityEnsemble::gamma(std::size_t path, std::size_t step) const {
  return std::exp(log_gamma(path, step));
}

std::vector<double> DensityEnsemble::terminal() const {
  std::vector<double> out(n_paths_);
  for (std::size_t i = 0; i < n_paths_; ++i) out[i] = gamma(i, grid_.n_steps());
  return out;
}

std::vector<double> DensityEnsemble::terminal_log() const {
  std::vector<double> out(n_paths_);
  for (std::size_t i = 0; i < n_paths_; ++i) out[i] = log_gamma(i, grid_.n_steps());
  return out;
}

DensityEnsemble simulate_density(const IntensityFn& theta, const NoiseEnsemble& noise, const PathEnsemble& x_paths,
                                 unsigned workers) {
  if (!(noise.grid() == x_paths.grid()) || noise.n_paths() != x_paths.n_paths() ||
      noise.seed() != x_paths.noise().seed() || noise.substeps() != x_paths.noise().substeps()) {
    throw std::invalid_argument("simulate_density: noise does not match the output paths");
  }
  const TimeGrid& grid = noise.grid();
  const double dt = grid.dt();
  DensityEnsemble out(grid, noise.n_paths());
  parallel_for(noise.n_paths(), workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dW(grid.n_steps());
    for (std::size_t i = begin; i < end; ++i) {
      noise.fill(i, dW);
      auto lg = out.path_log(i);
      lg[0] = 0.0;
      for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double th = theta(grid.time(k), x_paths.at(i, k, 0));
        if (!std::isfinite(th)) {
          throw std::invalid_argument("simulate_density: non-finite intensity on path " + std::to_string(i) +
                                      " at step " + std::to_string(k));
        }
        lg[k + 1] = lg[k] + th * dW[k] - 0.5 * th * th * dt;
      }
    }
  });
  return out;
}

Estimate reweighted_expectation(std::span<const double> payoff, std::span<const double> gamma_T) {
  if (payoff.size() != gamma_T.size()) throw std::invalid_argument("reweighted_expectation: size mismatch");
  std::vector<double> weighted(payoff.size());
  for (std::size_t i = 0; i < payoff.size(); ++i) weighted[i] = gamma_T[i] * payoff[i];
  return mean_estimate(weighted);
}

FocReport hidden_action_foc_check(const FocInputs& in) {
  const std::size_t n = in.t.size();
  if (in.x.size() != n || in.e.size() != n || in.s.size() != n || in.q.size() != n || in.sigma.size() != n) {
    throw std::invalid_argument("foc check: inputs have different lengths");
  }
  if (!in.u_e || !in.f_e) throw std::invalid_argument("foc check: u_e and f_e are required");
  FocReport r;
  r.n_points = n;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fe = in.f_e(in.t[k], in.x[k], in.e[k]);
    if (!(std::abs(fe) >= 1e-12)) {
      throw DegenerateSensitivity("f_e vanishes at index " + std::to_string(k));
    }
    const double target = in.sigma[k] * in.u_e(in.t[k], in.x[k], in.e[k], in.s[k]) / fe;
    const double d = std::abs(in.q[k] - target);
    r.max_abs = std::max(r.max_abs, d);
    sum += d;
  }
  r.mean_abs = n ? sum / static_cast<double>(n) : 0.0;
  return r;
}

}  // namespace mvcontract
