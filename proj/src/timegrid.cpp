#include "mvcontract/timegrid.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <stdexcept>

#include "mvcontract/errors.hpp"
#include "mvcontract/numerics.hpp"

namespace mvcontract {

TimeGrid::TimeGrid(double t_end, std::size_t n_steps)
    : t_end_(t_end), n_steps_(n_steps), dt_(t_end / static_cast<double>(n_steps)) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("time grid: horizon T must be positive and finite");
  }
  if (n_steps < 2) throw std::invalid_argument("time grid: n_steps must be at least 2");
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(n_points());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

std::pair<std::size_t, double> TimeGrid::locate(double t) const {
  if (!(t > 0.0)) return {0, 0.0};
  if (t >= t_end_) return {n_steps_ - 1, 1.0};
  const double u = t / dt_;
  auto k = static_cast<std::size_t>(std::floor(u));
  double frac = u - static_cast<double>(k);
  // Snap to nodes so that evaluating at time(k) reproduces node values.
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < 1e-9) {
    k = static_cast<std::size_t>(nearest);
    frac = 0.0;
  }
  if (k >= n_steps_) return {n_steps_ - 1, 1.0};
  return {k, frac};
}

TimeGrid make_grid(double t_end, std::size_t n_steps) { return TimeGrid(t_end, n_steps); }

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL)) {}

std::uint64_t PathRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double PathRng::uniform() {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(next_u64() >> 11) + 0.5) * kScale;
}

double PathRng::standard_normal() {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

NoiseEnsemble::NoiseEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, std::size_t substeps)
    : grid_(grid),
      n_paths_(n_paths),
      seed_(seed),
      substeps_(substeps),
      fine_sd_(std::sqrt(grid.t_end() / static_cast<double>(grid.n_steps() * substeps))) {
  if (n_paths == 0) throw std::invalid_argument("noise: n_paths must be at least 1");
  if (substeps == 0) throw std::invalid_argument("noise: substeps must be at least 1");
}

void NoiseEnsemble::fill(std::size_t path, std::span<double> out) const {
  if (out.size() != grid_.n_steps()) throw std::invalid_argument("noise: output span has wrong length");
  PathRng rng(seed_, path);
  for (double& dw : out) {
    double sum = 0.0;
    for (std::size_t j = 0; j < substeps_; ++j) sum += fine_sd_ * rng.standard_normal();
    dw = sum;
  }
}

std::vector<double> NoiseEnsemble::increments(std::size_t path) const {
  std::vector<double> out(grid_.n_steps());
  fill(path, out);
  return out;
}

NoiseEnsemble sample_noise(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
  return NoiseEnsemble(grid, n_paths, seed);
}

NoiseEnsemble coarsen(const NoiseEnsemble& noise, std::size_t factor) {
  const auto& g = noise.grid();
  if (factor == 0 || g.n_steps() % factor != 0) {
    throw std::invalid_argument("coarsen: factor must divide n_steps");
  }
  return NoiseEnsemble(TimeGrid(g.t_end(), g.n_steps() / factor), noise.n_paths(), noise.seed(),
                       noise.substeps() * factor);
}

PathEnsemble::PathEnsemble(NoiseEnsemble noise, std::vector<std::string> labels)
    : noise_(std::move(noise)), labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("path ensemble: need at least one component");
  states_.resize(noise_.n_paths() * noise_.grid().n_points() * labels_.size());
}

std::vector<double> PathEnsemble::series(std::size_t path, std::size_t component) const {
  std::vector<double> out(grid().n_points());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(path, k, component);
  return out;
}

std::vector<double> PathEnsemble::cross_section(std::size_t step, std::size_t component) const {
  std::vector<double> out(n_paths());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, step, component);
  return out;
}

namespace {

void integrate_one(const SdeSystem& system, std::span<const double> init, const TimeGrid& grid,
                   std::span<const double> dW, std::span<double> traj, std::span<double> rate,
                   std::span<double> loading, std::size_t path) {
  const std::size_t d = system.dim;
  const double dt = grid.dt();
  std::copy(init.begin(), init.end(), traj.begin());
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.time(k);
    auto xk = traj.subspan(k * d, d);
    auto next = traj.subspan((k + 1) * d, d);
    system.drift(t, xk, rate);
    system.diffusion(t, xk, loading);
    for (std::size_t c = 0; c < d; ++c) {
      next[c] = xk[c] + rate[c] * dt + loading[c] * dW[k];
      if (!std::isfinite(next[c])) throw SimulationDiverged(path, k + 1);
    }
  }
}

}  // namespace

void simulate_paths(const SdeSystem& system, std::span<const double> init, const NoiseEnsemble& noise,
                    const PathVisitor& visit, unsigned workers) {
  const std::size_t d = system.dim;
  if (init.size() != d) throw std::invalid_argument("euler_maruyama: init has wrong dimension");
  for (double v : init) {
    if (!std::isfinite(v)) throw std::invalid_argument("euler_maruyama: init must be finite");
  }
  const TimeGrid& grid = noise.grid();
  parallel_for(noise.n_paths(), workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dW(grid.n_steps());
    std::vector<double> traj(grid.n_points() * d);
    std::vector<double> rate(d), loading(d);
    for (std::size_t path = begin; path < end; ++path) {
      noise.fill(path, dW);
      integrate_one(system, init, grid, dW, traj, rate, loading, path);
      visit(path, traj, dW);
    }
  });
}

PathEnsemble euler_maruyama(const SdeSystem& system, std::span<const double> init, const NoiseEnsemble& noise,
                            std::vector<std::string> labels, unsigned workers) {
  if (labels.empty()) {
    for (std::size_t c = 0; c < system.dim; ++c) labels.push_back("x" + std::to_string(c));
  }
  if (labels.size() != system.dim) throw std::invalid_argument("euler_maruyama: label count != dim");
  PathEnsemble out(noise, std::move(labels));
  simulate_paths(
      system, init, noise,
      [&out](std::size_t path, std::span<const double> traj, std::span<const double>) {
        std::copy(traj.begin(), traj.end(), out.path_data(path).begin());
      },
      workers);
  return out;
}

}  // namespace mvcontract
