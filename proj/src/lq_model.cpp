#include "mvcontract/lq_model.hpp"

#include <cmath>
#include <stdexcept>

#include "mvcontract/errors.hpp"

namespace mvcontract {

void LqParams::validate() const {
  for (double v : {a, b, sigma, alpha, beta, T, W0, R0}) {
    if (!std::isfinite(v)) throw std::invalid_argument("model parameters must be finite");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(R0 > 0.0)) throw std::invalid_argument("R0 must be positive");
}

std::string_view to_string(P2DriftMode mode) {
  return mode == P2DriftMode::as_printed ? "as_printed" : "eta_equals_x";
}

P2DriftMode parse_p2_drift_mode(std::string_view name) {
  if (name == "as_printed") return P2DriftMode::as_printed;
  if (name == "eta_equals_x") return P2DriftMode::eta_equals_x;
  throw std::invalid_argument("unknown p2 drift mode '" + std::string(name) + "'");
}

double optimal_effort(double b, double p, double s) { return b * p + s; }

double p2_cashflow_weight(double b, P2DriftMode mode) {
  return mode == P2DriftMode::as_printed ? 1.0 + b : b;
}

double optimal_cashflow(double b, double P1, double P2, double lambda_P, P2DriftMode mode) {
  if (!(lambda_P >= kLambdaMin)) {
    throw DegenerateMultiplier("lambda_P = " + std::to_string(lambda_P) + " is below the floor " +
                               std::to_string(kLambdaMin));
  }
  return (b * P1 + p2_cashflow_weight(b, mode) * P2) / lambda_P;
}

double agent_hamiltonian(const LqParams& params, double x, double e, double p, double q, double s) {
  const double gap = s - e;
  return p * (params.a * x + params.b * e) + q * params.sigma - 0.5 * gap * gap;
}

double principal_hamiltonian(const LqParams& params, const PrincipalHamiltonianArgs& h, P2DriftMode mode) {
  const double a = params.a;
  const double b = params.b;
  const double x_drift = a * h.x + b * b * h.p + b * h.s;
  const double eta_drift = mode == P2DriftMode::as_printed ? h.s + x_drift : x_drift;
  return -a * h.p * h.R + x_drift * h.P1 + eta_drift * h.P2 + params.sigma * (h.Q1 + h.Q2) -
         h.lambda_E * b * b * h.p * h.p / 2.0 - h.lambda_P * h.s * h.s / 2.0;
}

double agent_cost_integrand(double s, double e) {
  const double gap = s - e;
  return 0.5 * gap * gap;
}

double principal_cost_integrand(double s) { return 0.5 * s * s; }

TerminalCosts terminal_costs(const LqParams& params, double x_T) {
  const double sq = x_T * x_T;
  return {-params.alpha * sq / 2.0, -params.beta * sq / 2.0};
}

}  // namespace mvcontract
