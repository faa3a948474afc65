#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mvcontract/lq_model.hpp"
#include "mvcontract/multipliers.hpp"
#include "mvcontract/numerics.hpp"
#include "mvcontract/riccati.hpp"
#include "mvcontract/timegrid.hpp"

namespace mvcontract {

struct EvalOptions {
  P2DriftMode mode = P2DriftMode::eta_equals_x;
  double blowup_bound = 1e8;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct ContractEvaluation {
  Estimate J_A;
  Estimate J_P;
  Estimate var_xT;
  /// Running parts before the terminal bonus: E[∫(s̄−ē)²/2 dt], E[∫s̄²/2 dt].
  Estimate agent_running;
  Estimate principal_running;
  Estimate mean_xT;
  /// max over paths of |∫(s̄−ē)²/2 dt − ∫b²p²/2 dt| (ē − s̄ = b·p).
  double effort_identity_gap = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  MultiplierTriple multipliers;
  LqParams params;
};

/// integrate_riccati → integrate_means → closed-loop Euler-Maruyama, with
/// left-endpoint Riemann sums for the running costs, the unbiased sample
/// variance of x(T) and delta-method standard error.
ContractEvaluation evaluate_contract(const LqParams& params, const MultiplierTriple& mult, std::size_t n_paths,
                                     std::size_t n_steps, std::uint64_t seed, const EvalOptions& options = {});

/// Same, driven by a caller-supplied noise ensemble (e.g. a coarsened one).
ContractEvaluation evaluate_contract(const LqParams& params, const MultiplierTriple& mult,
                                     const NoiseEnsemble& noise, const EvalOptions& options = {});

/// Evaluation along an already-integrated solution.
ContractEvaluation evaluate_contract(const RiccatiSolution& sol, const NoiseEnsemble& noise,
                                     const EvalOptions& options = {});

FeasibilityReport classify_feasibility(const ContractEvaluation& eval, double tol);

struct ConvergenceRow {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  Estimate J_A;
  Estimate J_P;
  Estimate var_xT;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // n_paths-major, n_steps-minor
  /// se(J_P) at n_paths[i] over se(J_P) at n_paths[i+1], at the finest step count.
  std::vector<double> se_ratios;
  /// |ΔJ_P| between consecutive step counts at the largest path count, in
  /// units of the combined standard error.
  std::vector<double> step_changes;
  bool clt_scaling_ok = true;
  bool bias_plateau_ok = true;
};

/// Table of estimates over n_paths × n_steps. Step counts that divide the
/// finest one share its Brownian paths (coarsened noise). CLT scaling is
/// checked for doublings only, expecting ratios in [1.2, 1.7]; the step
/// plateau asks for changes below two combined standard errors.
ConvergenceReport convergence_study(const LqParams& params, const MultiplierTriple& mult,
                                    std::span<const std::size_t> n_paths_list,
                                    std::span<const std::size_t> n_steps_list, std::uint64_t seed,
                                    const EvalOptions& options = {});

}  // namespace mvcontract
