// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvcontract/closed_loop.hpp"
#include "mvcontract/commands.hpp"
#include "mvcontract/montecarlo.hpp"
#include "mvcontract/riccati.hpp"
#include "mvcontract/weak_formulation.hpp"
#include "oracles.hpp"

using namespace mvcontract;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string num(double v, const char* f = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const LqParams kReference{};  // a = b = σ = 1, α = 0.2, β = 1, T = 0.03
MultiplierTriple reference_point() { return from_case(TransversalityCase::iv, 0.1, std::numbers::pi / 2); }

MultiplierTriple random_case(std::mt19937_64& gen, double lp) {
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half = std::numbers::pi / 2;
  switch (pick(gen)) {
    case 0: return from_case(TransversalityCase::i, lp);
    case 1: return from_case(TransversalityCase::ii, lp);
    case 2: return from_case(TransversalityCase::iii, lp, -half * u(gen));
    case 3: return from_case(TransversalityCase::iv, lp, half * u(gen));
    default: return from_case(TransversalityCase::v, lp);
  }
}

Outcome terminal_conditions() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    LqParams p;
    p.a = -1.0 + 2.0 * u(gen);
    p.b = -1.5 + 3.0 * u(gen);
    p.sigma = 0.2 + 1.8 * u(gen);
    p.alpha = 0.05 + 0.95 * u(gen);
    p.beta = 0.1 + 1.9 * u(gen);
    p.T = 0.005 + 0.025 * u(gen);
    const auto m = random_case(gen, 0.1 + 0.9 * u(gen));
    const auto sol = integrate_riccati(p, m, make_grid(p.T, 32));
    const auto want = oracle::terminal_row(p.alpha, p.beta, m.lambda_P, m.lambda_E, m.lambda_V);
    const auto& got = sol.row(32);
    for (std::size_t i = 0; i < kNumCoefficients; ++i) {
      const double err = want[i] == 0.0 ? (got[i] == 0.0 ? 0.0 : INFINITY) : std::abs(got[i] - want[i]) / std::abs(want[i]);
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1e-14, "100 draws, max relative error " + num(worst)};
}

Outcome ansatz_residual_oracle() {
  const auto m = reference_point();
  const auto fine = sample_noise(make_grid(kReference.T, 2048), 10000, 2024);
  std::vector<double> res;
  std::string detail;
  for (std::size_t factor : {8u, 4u, 2u, 1u}) {
    const auto noise = factor == 1 ? fine : coarsen(fine, factor);
    const auto sol = integrate_riccati(kReference, m, noise.grid());
    const double x0 = 0.1, R0 = 0.05;
    const auto means = integrate_means(sol, x0, R0);
    const ClosedLoopField field(sol, means);
    const std::array<double, 2> init = {x0, R0};
    const auto paths = euler_maruyama(field.as_sde(), init, noise, {"x", "R"});
    res.push_back(ansatz_residual(sol, paths).max_abs);
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(noise.grid().n_steps()) + ": " +
              num(res.back());
  }
  bool ok = res[0] <= 1e-3;
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    const double ratio = res[i] / res[i + 1];
    detail += (i ? ", " : "; ratios ") + num(ratio, "%.3f");
    ok = ok && ratio >= 1.7;
  }
  return {ok, detail};
}

Outcome rk4_order() {
  const auto m = reference_point();
  const auto ref = integrate_riccati(kReference, m, make_grid(kReference.T, 8192));
  std::vector<double> err;
  for (std::size_t n : {16u, 32u, 64u}) {
    const auto s = integrate_riccati(kReference, m, make_grid(kReference.T, n));
    double e = 0.0;
    for (std::size_t i = 0; i < kNumCoefficients; ++i) e = std::max(e, std::abs(s.row(0)[i] - ref.row(0)[i]));
    err.push_back(e);
  }
  bool ok = true;
  std::string detail = "errors " + num(err[0]) + ", " + num(err[1]) + ", " + num(err[2]) + "; ratios";
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double r = err[i] / err[i + 1];
    detail += " " + num(r, "%.2f");
    ok = ok && r >= 8.0 && r <= 32.0;
  }
  return {ok, detail};
}

Outcome zero_gain_variance() {
  LqParams p = kReference;
  p.b = 0.0;
  const double exact = oracle::ou_variance(p.a, p.sigma, p.T);
  int passes = 0;
  std::string detail;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    const auto ev = evaluate_contract(p, reference_point(), 100000, 64, seed);
    const double z = std::abs(ev.var_xT.value - exact) / ev.var_xT.std_error;
    passes += z <= 3.0;
    detail += num(z, "%.2f") + " ";
  }
  return {passes >= 4, std::to_string(passes) + "/5 seeds within 3 se of " + num(exact, "%.6g") + " (z: " +
                           detail.substr(0, detail.size() - 1) + ")"};
}

Outcome argmax_invariance() {
  std::mt19937_64 gen(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lp(0.2, 1.0);
  constexpr double kCell = 1e-3;
  double worst_e = 0.0, worst_s = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    LqParams p = kReference;
    p.a = u(gen);
    p.b = u(gen);
    p.sigma = 1.0 + u(gen) * 0.5;
    const double x = u(gen), pp = u(gen), q = u(gen), s = u(gen);
    const double e_hat =
        oracle::grid_argmax([&](double e) { return agent_hamiltonian(p, x, e, pp, q, s); }, 0.0, 4.0, kCell);
    worst_e = std::max(worst_e, std::abs(e_hat - (p.b * pp + s)));

    PrincipalHamiltonianArgs h{x, pp, 0.0, u(gen), u(gen), u(gen), u(gen), u(gen), u(gen), lp(gen)};
    const double s_hat = oracle::grid_argmax(
        [&](double sv) {
          auto args = h;
          args.s = sv;
          return principal_hamiltonian(p, args, P2DriftMode::as_printed);
        },
        0.0, 20.0, kCell);
    worst_s = std::max(worst_s, std::abs(s_hat - (p.b * h.P1 + (1.0 + p.b) * h.P2) / h.lambda_P));
  }
  return {worst_e <= kCell && worst_s <= kCell,
          "1000 draws, max |e_grid - (bp+s)| " + num(worst_e) + ", max |s_grid - s_bar| " + num(worst_s)};
}

Outcome density_martingale() {
  const double T = kReference.T, sigma = kReference.sigma;
  const auto grid = make_grid(T, 32);
  const auto noise = sample_noise(grid, 100000, 606);
  const auto strong_noise = sample_noise(grid, 100000, 607);
  const std::array<double, 1> init = {0.0};
  const SdeSystem plain{1, [](double, std::span<const double>, std::span<double> o) { o[0] = 0.0; },
                        [sigma](double, std::span<const double>, std::span<double> o) { o[0] = sigma; }};
  const auto x = euler_maruyama(plain, init, noise, {"x"});
  const auto xT = x.cross_section(32, 0);
  bool ok = true;
  std::string detail;
  for (double th : {0.5, 1.0, 2.0}) {
    const auto dens = simulate_density([th](double, double) { return th; }, noise, x);
    const auto gT = dens.terminal();
    const auto g = mean_estimate(gT);
    const auto weak = reweighted_expectation(xT, gT);
    const double f = th * sigma;
    const SdeSystem drifted{1, [f](double, std::span<const double>, std::span<double> o) { o[0] = f; },
                            [sigma](double, std::span<const double>, std::span<double> o) { o[0] = sigma; }};
    const auto strong = mean_estimate(euler_maruyama(drifted, init, strong_noise, {"x"}).cross_section(32, 0));
    const double zg = std::abs(g.value - 1.0) / g.std_error;
    const double zx = std::abs(weak.value - strong.value) / std::hypot(weak.std_error, strong.std_error);
    ok = ok && zg <= 3.0 && zx <= 3.0;
    detail += (detail.empty() ? "" : "; ") + std::string("theta=") + num(th) + " E[G]=" + num(g.value, "%.5f") +
              " (" + num(zg, "%.2f") + " se), weak-strong " + num(zx, "%.2f") + " se";
  }
  return {ok, detail};
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome sweep_reproduction() {
  RunConfig cfg;
  cfg.case_tag = TransversalityCase::iv;
  cfg.lambda_P = parse_list("linspace(0.1, 0.9, 9)");
  cfg.theta = parse_list("linspace(0, pi/2, 10)");
  cfg.n_paths = 100000;
  cfg.n_steps = 64;
  cfg.seed = 2;
  const auto base = std::filesystem::temp_directory_path() / "mvcontract_acceptance_sweep";
  std::filesystem::remove_all(base);
  std::string csv[2];
  std::vector<ContractEvaluation> evals;
  std::ostringstream sink;
  for (int run = 0; run < 2; ++run) {
    cfg.out_dir = (base / ("run" + std::to_string(run))).string();
    const int code = run_simulate(cfg, sink, std::cerr, run == 0 ? &evals : nullptr);
    if (code != kExitOk) return {false, "simulate exited with " + std::to_string(code)};
    csv[run] = slurp(std::filesystem::path(cfg.out_dir) / "eval.csv");
  }
  const bool identical = csv[0] == csv[1] && !csv[0].empty();
  bool finite = evals.size() == 90;
  bool nonneg = true;
  double min_var = INFINITY;
  for (const auto& ev : evals) {
    for (double v : {ev.J_A.value, ev.J_P.value, ev.var_xT.value, ev.J_A.std_error, ev.J_P.std_error,
                     ev.var_xT.std_error}) {
      finite = finite && std::isfinite(v);
    }
    nonneg = nonneg && ev.agent_running.value >= 0.0 && ev.principal_running.value >= 0.0 && ev.var_xT.value >= 0.0;
    min_var = std::min(min_var, ev.var_xT.value);
  }
  // Numeric columns of eval.csv: everything but the two verdicts.
  std::istringstream rows(csv[0]);
  std::string line;
  std::getline(rows, line);
  std::size_t n_rows = 0;
  while (std::getline(rows, line)) {
    ++n_rows;
    std::istringstream cells(line);
    std::string cell;
    for (int col = 0; col < 10 && std::getline(cells, cell, ','); ++col) {
      if (col == 1) continue;  // theta
      finite = finite && std::isfinite(std::stod(cell));
    }
  }
  finite = finite && n_rows == 90;
  std::filesystem::remove_all(base);
  return {identical && finite && nonneg,
          std::to_string(evals.size()) + " points, finite=" + (finite ? "yes" : "no") +
              ", running costs and variance nonnegative=" + (nonneg ? "yes" : "no") + " (min var " +
              num(min_var) + "), byte-identical=" + (identical ? "yes" : "no")};
}

Outcome multiplier_normalization() {
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool signs = true;
  for (int draw = 0; draw < 10000; ++draw) {
    const double lp = u(gen);
    const auto m = random_case(gen, lp);
    worst = std::max(worst, m.norm_defect());
    if (m.case_tag == TransversalityCase::i || m.case_tag == TransversalityCase::ii) {
      const auto want = oracle::case_triple(m.case_tag == TransversalityCase::i ? 1 : 2, lp);
      signs = signs && m.lambda_E == 0.0 && m.lambda_V == want.V &&
              (m.case_tag == TransversalityCase::i ? m.lambda_V >= 0.0 : m.lambda_V <= 0.0);
    }
  }
  return {worst <= 1e-12 && signs,
          "10000 draws, max defect " + num(worst) + ", case i/ii signs " + (signs ? "ok" : "wrong")};
}

Outcome clt_scaling() {
  const std::vector<std::size_t> np = {10000, 20000, 40000, 80000};
  const std::vector<std::size_t> ns = {64};
  const auto rep = convergence_study(kReference, reference_point(), np, ns, 909);
  bool ok = rep.se_ratios.size() == 3;
  std::string detail = "se(J_P) ratios";
  for (double r : rep.se_ratios) {
    detail += " " + num(r, "%.3f");
    ok = ok && r >= 1.2 && r <= 1.7;
  }
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"terminal_condition_exactness", 5, terminal_conditions},
      {"ansatz_residual_oracle", 30, ansatz_residual_oracle},
      {"rk4_step_halving", 5, rk4_order},
      {"zero_gain_variance_oracle", 20, zero_gain_variance},
      {"hamiltonian_argmax", 5, argmax_invariance},
      {"density_martingale", 30, density_martingale},
      {"case_iv_sweep_reproduction", 600, sweep_reproduction},
      {"multiplier_normalization", 2, multiplier_normalization},
      {"clt_scaling", 60, clt_scaling},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool passed = out.passed && in_time;
    failures += !passed;
    std::cout << (passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << out.detail << " (" << num(secs, "%.2f")
              << " s of " << num(c.budget_s) << (in_time ? "" : ", over budget") << ")" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
