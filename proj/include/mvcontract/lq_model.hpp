#pragma once

#include <string>
#include <string_view>

namespace mvcontract {

/// Scalar constants of the linear-quadratic Hidden Contract model:
///   dx = (a·x + b·e) dt + σ dW,  x(0) = 0,
///   J_A = E[∫(s−e)²/2 dt − α·x(T)²/2],  J_P = E[∫ s²/2 dt − β·x(T)²/2],
/// with participation bounds J_A ≤ W0 and Var(x(T)) ≤ R0.
struct LqParams {
  double a = 1.0;
  double b = 1.0;
  double sigma = 1.0;
  double alpha = 0.2;
  double beta = 1.0;
  double T = 0.03;
  double W0 = -0.005;
  double R0 = 0.03;

  /// Throws std::invalid_argument unless σ, α, β, T, R0 > 0 and all finite.
  void validate() const;

  bool operator==(const LqParams&) const = default;
};

/// Which drift multiplies P2 in the principal's Hamiltonian.
///  - as_printed:   (s + a·x + b²p + b·s)·P2, so ∂H_P/∂s has (1+b)·P2
///  - eta_equals_x: (a·x + b²p + b·s)·P2, the x-drift, so ∂H_P/∂s has b·P2
enum class P2DriftMode { as_printed, eta_equals_x };

std::string_view to_string(P2DriftMode mode);
/// Throws std::invalid_argument for unknown names.
P2DriftMode parse_p2_drift_mode(std::string_view name);

/// Floor on λ_P; the optimal cash-flow divides by it.
inline constexpr double kLambdaMin = 1e-6;

/// ē = b·p + s, the maximizer of H_A over e.
double optimal_effort(double b, double p, double s);

/// Weight of P2 in ∂H_P/∂s: 1+b as printed, b when η ≡ x.
double p2_cashflow_weight(double b, P2DriftMode mode);

/// s̄ = (b·P1 + w·P2)/λ_P with w from p2_cashflow_weight.
/// Throws DegenerateMultiplier when λ_P < kLambdaMin.
double optimal_cashflow(double b, double P1, double P2, double lambda_P,
                        P2DriftMode mode = P2DriftMode::as_printed);

/// H_A(x, e, p, q, s) = p·(a·x + b·e) + q·σ − (s − e)²/2.
double agent_hamiltonian(const LqParams& params, double x, double e, double p, double q, double s);

struct PrincipalHamiltonianArgs {
  double x = 0.0;
  double p = 0.0;
  double s = 0.0;
  double R = 0.0;
  double P1 = 0.0;
  double P2 = 0.0;
  double Q1 = 0.0;
  double Q2 = 0.0;
  double lambda_E = 0.0;
  double lambda_P = 0.0;
};

/// H_P = −a·p·R + (a·x + b²p + b·s)·P1 + (drift_η)·P2 + σ·(Q1 + Q2)
///       − λ_E·b²p²/2 − λ_P·s²/2,
/// where drift_η is selected by mode (see P2DriftMode).
double principal_hamiltonian(const LqParams& params, const PrincipalHamiltonianArgs& args,
                             P2DriftMode mode = P2DriftMode::as_printed);

/// (s − e)²/2
double agent_cost_integrand(double s, double e);
/// s²/2
double principal_cost_integrand(double s);

struct TerminalCosts {
  double agent = 0.0;
  double principal = 0.0;
};

/// (−α·x_T²/2, −β·x_T²/2)
TerminalCosts terminal_costs(const LqParams& params, double x_T);

}  // namespace mvcontract
