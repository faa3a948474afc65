#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mvcontract {

/// Uniform grid t_k = k·Δt on [0, T].
class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t n_steps);

  double t_end() const { return t_end_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_points() const { return n_steps_ + 1; }
  double dt() const { return dt_; }

  /// Grid node k. The last node is T exactly.
  double time(std::size_t k) const {
    return k == n_steps_ ? t_end_ : static_cast<double>(k) * dt_;
  }
  std::vector<double> times() const;

  /// Locates t on the grid: returns the left node index and the fractional
  /// position in [0, 1] towards the next node. Times outside [0, T] clamp.
  std::pair<std::size_t, double> locate(double t) const;

  bool operator==(const TimeGrid& other) const {
    return t_end_ == other.t_end_ && n_steps_ == other.n_steps_;
  }

 private:
  double t_end_;
  std::size_t n_steps_;
  double dt_;
};

/// make_grid with the argument checks of the public API.
TimeGrid make_grid(double t_end, std::size_t n_steps);

/// splitmix64 stream. One stream per (seed, path) gives independent,
/// order-independent per-path draws.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by inverse CDF: −√2·erfc⁻¹(2u).
  double standard_normal();

 private:
  std::uint64_t state_;
};

/// 64-bit finalizer used to derive stream keys and per-point seeds.
std::uint64_t mix64(std::uint64_t z);

/// Brownian increments on a grid, derived on demand from (seed, path).
///
/// Each coarse increment is the sum of `substeps` fine draws, each with
/// variance Δt/substeps. Coarsening an ensemble therefore reproduces the same
/// Brownian path on the coarser grid, which is what step-refinement studies
/// need.
class NoiseEnsemble {
 public:
  NoiseEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, std::size_t substeps = 1);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t substeps() const { return substeps_; }

  /// Writes the n_steps increments of one path into out.
  void fill(std::size_t path, std::span<double> out) const;
  std::vector<double> increments(std::size_t path) const;

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  std::size_t substeps_;
  double fine_sd_;
};

NoiseEnsemble sample_noise(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

/// Same Brownian paths on a grid with n_steps/factor steps.
NoiseEnsemble coarsen(const NoiseEnsemble& noise, std::size_t factor);

/// Drift and diffusion of a system driven by one scalar Brownian motion.
struct SdeSystem {
  using Field = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

  std::size_t dim = 1;
  Field drift;
  /// Per-component loading on dW.
  Field diffusion;
};

/// Simulated states laid out [path][step][component].
class PathEnsemble {
 public:
  PathEnsemble(NoiseEnsemble noise, std::vector<std::string> labels);

  const TimeGrid& grid() const { return noise_.grid(); }
  const NoiseEnsemble& noise() const { return noise_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t dim() const { return labels_.size(); }
  std::size_t n_paths() const { return noise_.n_paths(); }

  double at(std::size_t path, std::size_t step, std::size_t component) const {
    return states_[(path * grid().n_points() + step) * dim() + component];
  }
  std::span<double> path_data(std::size_t path) {
    return {states_.data() + path * grid().n_points() * dim(), grid().n_points() * dim()};
  }
  std::span<const double> path_data(std::size_t path) const {
    return {states_.data() + path * grid().n_points() * dim(), grid().n_points() * dim()};
  }
  /// One component of one path as a series over the grid.
  std::vector<double> series(std::size_t path, std::size_t component) const;
  /// All paths' values at one step for one component.
  std::vector<double> cross_section(std::size_t step, std::size_t component) const;

 private:
  NoiseEnsemble noise_;
  std::vector<std::string> labels_;
  std::vector<double> states_;
};

/// Called once per simulated path with its trajectory ([step][component])
/// and the increments that drove it. Invoked concurrently for different
/// paths; implementations must only write path-indexed storage.
using PathVisitor =
    std::function<void(std::size_t path, std::span<const double> trajectory, std::span<const double> dW)>;

/// Euler-Maruyama along each path without storing the ensemble.
void simulate_paths(const SdeSystem& system, std::span<const double> init, const NoiseEnsemble& noise,
                    const PathVisitor& visit, unsigned workers = 0);

/// X_{k+1} = X_k + drift(X_k, t_k)Δt + diffusion(X_k, t_k)ΔW_k for every path.
PathEnsemble euler_maruyama(const SdeSystem& system, std::span<const double> init, const NoiseEnsemble& noise,
                            std::vector<std::string> labels = {}, unsigned workers = 0);

}  // namespace mvcontract
