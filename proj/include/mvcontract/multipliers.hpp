#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvcontract/lq_model.hpp"
#include "mvcontract/numerics.hpp"

namespace mvcontract {

/// Transversality cases on the boundary of {J_E ≤ W0, 0 ≤ J_V ≤ R0}:
///   i    J_V = 0                 λ_E = 0,            λ_V =  √(1−λ_P²)
///   ii   J_V = R0                λ_E = 0,            λ_V = −√(1−λ_P²)
///   iii  J_E = W0, J_V = 0       λ_E = −√(1−λ_P²)cosθ, λ_V = −√(1−λ_P²)sinθ, θ ∈ [−π/2, 0]
///   iv   J_E = W0, J_V = R0      same formulas,                         θ ∈ [0, π/2]
///   v    J_E = W0                λ_E = −√(1−λ_P²),   λ_V = 0
/// `explicit_triple` carries a user-supplied triple with no case attached.
enum class TransversalityCase { i, ii, iii, iv, v, explicit_triple };

std::string_view to_string(TransversalityCase c);
/// Accepts i, ii, iii, iv, v, explicit.
TransversalityCase parse_case(std::string_view name);
bool case_uses_theta(TransversalityCase c);

struct MultiplierTriple {
  double lambda_P = 1.0;
  double lambda_E = 0.0;
  double lambda_V = 0.0;
  TransversalityCase case_tag = TransversalityCase::v;
  std::optional<double> theta;

  /// |λ_P² + λ_E² + λ_V² − 1|
  double norm_defect() const;
};

/// Normalization tolerance for constructed and supplied triples.
inline constexpr double kNormTolerance = 1e-12;

/// Builds the triple for a transversality case. θ must be given exactly for
/// cases iii and iv and lie in that case's interval; λ_P must lie in [0, 1].
MultiplierTriple from_case(TransversalityCase c, double lambda_P, std::optional<double> theta = std::nullopt);

/// Wraps a user-supplied triple after checking λ_P ≥ 0 and normalization.
MultiplierTriple explicit_multipliers(double lambda_P, double lambda_E, double lambda_V);

/// Cartesian grid, λ_P-major and θ-minor. θ points are required for cases
/// iii/iv and rejected otherwise. Every λ_P must be ≥ kLambdaMin.
std::vector<MultiplierTriple> sweep_grid(TransversalityCase c, std::span<const double> lambda_P_points,
                                         std::span<const double> theta_points = {});

enum class Verdict { feasible, infeasible, boundary };
std::string_view to_string(Verdict v);

struct FeasibilityReport {
  Verdict agent_cost = Verdict::feasible;  // J_A against W0
  Verdict variance = Verdict::feasible;    // Var(x(T)) against R0
  bool variance_at_zero = false;           // Var(x(T)) within the band of 0
  /// Cases whose activation pattern matches the estimates. Empty when no
  /// constraint is active, which is only reachable with λ_P = 1.
  std::vector<TransversalityCase> consistent_cases;
  bool interior() const { return consistent_cases.empty(); }
};

/// Non-strict classification of J_A ≤ W0 and Var(x(T)) ≤ R0. An estimate
/// within tol + 2·(standard error) of a bound is reported as boundary.
FeasibilityReport classify_feasibility(const Estimate& J_A, const Estimate& var_xT, const LqParams& params,
                                       double tol);

/// Default band width: 1e-3·R0.
inline double default_feasibility_tol(const LqParams& params) { return 1e-3 * params.R0; }

}  // namespace mvcontract
