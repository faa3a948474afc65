#include <gtest/gtest.h>

#include <cstring>
#include <numbers>

#include "mvcontract/montecarlo.hpp"
#include "oracles.hpp"

using namespace mvcontract;

namespace {

MultiplierTriple reference_multipliers() { return from_case(TransversalityCase::iv, 0.1, std::numbers::pi / 2); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(MonteCarlo, ReproducibleAndWorkerInvariant) {
  const LqParams p;
  EvalOptions one;
  one.workers = 1;
  EvalOptions many;
  many.workers = 4;
  const auto a = evaluate_contract(p, reference_multipliers(), 3001, 32, 77, one);
  const auto b = evaluate_contract(p, reference_multipliers(), 3001, 32, 77, many);
  const auto c = evaluate_contract(p, reference_multipliers(), 3001, 32, 77, one);
  for (const auto* ev : {&b, &c}) {
    EXPECT_TRUE(same_bits(a.J_A.value, ev->J_A.value));
    EXPECT_TRUE(same_bits(a.J_P.value, ev->J_P.value));
    EXPECT_TRUE(same_bits(a.var_xT.value, ev->var_xT.value));
    EXPECT_TRUE(same_bits(a.var_xT.std_error, ev->var_xT.std_error));
  }
  const auto d = evaluate_contract(p, reference_multipliers(), 3001, 32, 78, one);
  EXPECT_NE(a.J_P.value, d.J_P.value);
}

TEST(MonteCarlo, ZeroGainVarianceOracle) {
  LqParams p;
  p.b = 0.0;
  const auto ev = evaluate_contract(p, reference_multipliers(), 100000, 64, 3);
  const double exact = oracle::ou_variance(p.a, p.sigma, p.T);
  EXPECT_LT(std::abs(ev.var_xT.value - exact), 3.0 * ev.var_xT.std_error);
  // With b = 0 the agent pays nothing through effort: ē − s̄ = 0.
  EXPECT_EQ(ev.agent_running.value, 0.0);
}

TEST(MonteCarlo, EffortIdentityAndSigns) {
  const LqParams p;
  const auto ev = evaluate_contract(p, reference_multipliers(), 5000, 64, 1);
  EXPECT_LT(ev.effort_identity_gap, 1e-14);
  EXPECT_GE(ev.agent_running.value, 0.0);
  EXPECT_GE(ev.principal_running.value, 0.0);
  EXPECT_GE(ev.var_xT.value, 0.0);
  EXPECT_EQ(ev.n_paths, 5000u);
  EXPECT_EQ(ev.seed, 1u);
  // J = running − terminal term; the terminal part is −coef·E[x(T)²]/2.
  const double ex2 = ev.var_xT.value * (ev.n_paths - 1.0) / ev.n_paths + ev.mean_xT.value * ev.mean_xT.value;
  EXPECT_NEAR(ev.J_P.value, ev.principal_running.value - 0.5 * p.beta * ex2, 1e-12);
  EXPECT_NEAR(ev.J_A.value, ev.agent_running.value - 0.5 * p.alpha * ex2, 1e-12);
}

TEST(MonteCarlo, ConvergenceStudy) {
  const LqParams p;
  const std::vector<std::size_t> np = {4000, 8000, 16000};
  const std::vector<std::size_t> ns = {16, 32, 64};
  const auto rep = convergence_study(p, reference_multipliers(), np, ns, 5);
  ASSERT_EQ(rep.rows.size(), 9u);
  EXPECT_EQ(rep.rows[4].n_paths, 8000u);
  EXPECT_EQ(rep.rows[4].n_steps, 32u);
  ASSERT_EQ(rep.se_ratios.size(), 2u);
  for (double r : rep.se_ratios) {
    EXPECT_GE(r, 1.2);
    EXPECT_LE(r, 1.7);
  }
  EXPECT_TRUE(rep.clt_scaling_ok);
  ASSERT_EQ(rep.step_changes.size(), 2u);

  const std::vector<std::size_t> one_np = {1000}, one_ns = {8};
  EXPECT_EQ(convergence_study(p, reference_multipliers(), one_np, one_ns, 5).rows.size(), 1u);
  const std::vector<std::size_t> unsorted = {2000, 1000};
  EXPECT_THROW(convergence_study(p, reference_multipliers(), unsorted, one_ns, 5), std::invalid_argument);
  const std::vector<std::size_t> empty;
  EXPECT_THROW(convergence_study(p, reference_multipliers(), empty, one_ns, 5), std::invalid_argument);
}

TEST(MonteCarlo, FeasibilityUsesEstimates) {
  const LqParams p;
  const auto ev = evaluate_contract(p, reference_multipliers(), 5000, 32, 2);
  const auto rep = classify_feasibility(ev, default_feasibility_tol(p));
  const auto direct = classify_feasibility(ev.J_A, ev.var_xT, p, default_feasibility_tol(p));
  EXPECT_EQ(rep.agent_cost, direct.agent_cost);
  EXPECT_EQ(rep.variance, direct.variance);
}
