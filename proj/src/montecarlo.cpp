#include "mvcontract/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvcontract/closed_loop.hpp"

namespace mvcontract {

ContractEvaluation evaluate_contract(const RiccatiSolution& sol, const NoiseEnsemble& noise,
                                     const EvalOptions& options) {
  if (!(sol.grid() == noise.grid())) throw std::invalid_argument("evaluate_contract: grid mismatch");
  const auto means = integrate_means(sol);
  const ClosedLoopField field(sol, means);
  const auto& prm = sol.params();
  const auto& grid = sol.grid();
  const double dt = grid.dt();
  const double b2 = prm.b * prm.b;

  const std::size_t n_paths = noise.n_paths();
  std::vector<double> agent_run(n_paths), principal_run(n_paths), x_T(n_paths), gap(n_paths);

  const std::array<double, 2> init = {0.0, 0.0};
  simulate_paths(
      field.as_sde(), init, noise,
      [&](std::size_t path, std::span<const double> traj, std::span<const double>) {
        double agent = 0.0, principal = 0.0, via_p = 0.0;
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
          const auto c = field.controls(k, traj[2 * k], traj[2 * k + 1]);
          agent += agent_cost_integrand(c.s, c.e) * dt;
          principal += principal_cost_integrand(c.s) * dt;
          via_p += 0.5 * b2 * c.p * c.p * dt;
        }
        agent_run[path] = agent;
        principal_run[path] = principal;
        gap[path] = std::abs(agent - via_p);
        x_T[path] = traj[2 * grid.n_steps()];
      },
      options.workers);

  std::vector<double> J_A(n_paths), J_P(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto term = terminal_costs(prm, x_T[i]);
    J_A[i] = agent_run[i] + term.agent;
    J_P[i] = principal_run[i] + term.principal;
  }

  ContractEvaluation ev;
  ev.J_A = mean_estimate(J_A);
  ev.J_P = mean_estimate(J_P);
  ev.var_xT = variance_estimate(x_T);
  ev.agent_running = mean_estimate(agent_run);
  ev.principal_running = mean_estimate(principal_run);
  ev.mean_xT = mean_estimate(x_T);
  ev.effort_identity_gap = gap.empty() ? 0.0 : *std::max_element(gap.begin(), gap.end());
  ev.n_paths = n_paths;
  ev.n_steps = grid.n_steps();
  ev.seed = noise.seed();
  ev.multipliers = sol.multipliers();
  ev.params = prm;
  return ev;
}

ContractEvaluation evaluate_contract(const LqParams& params, const MultiplierTriple& mult,
                                     const NoiseEnsemble& noise, const EvalOptions& options) {
  const auto sol = integrate_riccati(params, mult, noise.grid(), {options.mode, options.blowup_bound});
  return evaluate_contract(sol, noise, options);
}

ContractEvaluation evaluate_contract(const LqParams& params, const MultiplierTriple& mult, std::size_t n_paths,
                                     std::size_t n_steps, std::uint64_t seed, const EvalOptions& options) {
  const auto noise = sample_noise(make_grid(params.T, n_steps), n_paths, seed);
  return evaluate_contract(params, mult, noise, options);
}

FeasibilityReport classify_feasibility(const ContractEvaluation& eval, double tol) {
  return classify_feasibility(eval.J_A, eval.var_xT, eval.params, tol);
}

ConvergenceReport convergence_study(const LqParams& params, const MultiplierTriple& mult,
                                    std::span<const std::size_t> n_paths_list,
                                    std::span<const std::size_t> n_steps_list, std::uint64_t seed,
                                    const EvalOptions& options) {
  if (n_paths_list.empty() || n_steps_list.empty()) {
    throw std::invalid_argument("convergence_study: lists must be nonempty");
  }
  if (!std::is_sorted(n_paths_list.begin(), n_paths_list.end()) ||
      !std::is_sorted(n_steps_list.begin(), n_steps_list.end())) {
    throw std::invalid_argument("convergence_study: lists must be increasing");
  }
  const std::size_t finest = n_steps_list.back();
  const TimeGrid fine_grid = make_grid(params.T, finest);

  ConvergenceReport report;
  for (std::size_t np : n_paths_list) {
    const auto fine = sample_noise(fine_grid, np, seed);
    for (std::size_t ns : n_steps_list) {
      const auto noise = finest % ns == 0 ? coarsen(fine, finest / ns) : sample_noise(make_grid(params.T, ns), np, seed);
      const auto ev = evaluate_contract(params, mult, noise, options);
      report.rows.push_back({np, ns, ev.J_A, ev.J_P, ev.var_xT});
    }
  }

  const std::size_t n_cols = n_steps_list.size();
  const auto row = [&](std::size_t i, std::size_t j) -> const ConvergenceRow& { return report.rows[i * n_cols + j]; };
  for (std::size_t i = 0; i + 1 < n_paths_list.size(); ++i) {
    const double ratio = row(i, n_cols - 1).J_P.std_error / row(i + 1, n_cols - 1).J_P.std_error;
    report.se_ratios.push_back(ratio);
    if (n_paths_list[i + 1] == 2 * n_paths_list[i] && !(ratio >= 1.2 && ratio <= 1.7)) {
      report.clt_scaling_ok = false;
    }
  }
  const std::size_t last = n_paths_list.size() - 1;
  for (std::size_t j = 0; j + 1 < n_cols; ++j) {
    const auto& lo = row(last, j).J_P;
    const auto& hi = row(last, j + 1).J_P;
    const double combined = std::hypot(lo.std_error, hi.std_error);
    const double change = combined > 0.0 ? std::abs(hi.value - lo.value) / combined : 0.0;
    report.step_changes.push_back(change);
    if (!(change < 2.0)) report.bias_plateau_ok = false;
  }
  return report;
}

}  // namespace mvcontract
