#include "mvcontract/multipliers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvcontract/errors.hpp"

namespace mvcontract {

std::string_view to_string(TransversalityCase c) {
  switch (c) {
    case TransversalityCase::i: return "i";
    case TransversalityCase::ii: return "ii";
    case TransversalityCase::iii: return "iii";
    case TransversalityCase::iv: return "iv";
    case TransversalityCase::v: return "v";
    case TransversalityCase::explicit_triple: return "explicit";
  }
  return "?";
}

TransversalityCase parse_case(std::string_view name) {
  if (name == "i") return TransversalityCase::i;
  if (name == "ii") return TransversalityCase::ii;
  if (name == "iii") return TransversalityCase::iii;
  if (name == "iv") return TransversalityCase::iv;
  if (name == "v") return TransversalityCase::v;
  if (name == "explicit") return TransversalityCase::explicit_triple;
  throw std::invalid_argument("unknown transversality case '" + std::string(name) + "'");
}

bool case_uses_theta(TransversalityCase c) {
  return c == TransversalityCase::iii || c == TransversalityCase::iv;
}

double MultiplierTriple::norm_defect() const {
  return std::abs(lambda_P * lambda_P + lambda_E * lambda_E + lambda_V * lambda_V - 1.0);
}

MultiplierTriple from_case(TransversalityCase c, double lambda_P, std::optional<double> theta) {
  if (!(lambda_P >= 0.0 && lambda_P <= 1.0)) {
    throw std::invalid_argument("lambda_P must lie in [0, 1]");
  }
  if (c == TransversalityCase::explicit_triple) {
    throw std::invalid_argument("explicit triples are built with explicit_multipliers()");
  }
  if (case_uses_theta(c) != theta.has_value()) {
    throw std::invalid_argument(std::string("theta must ") + (case_uses_theta(c) ? "" : "not ") +
                                "be supplied for case " + std::string(to_string(c)));
  }
  const double r = std::sqrt(1.0 - lambda_P * lambda_P);
  MultiplierTriple m;
  m.lambda_P = lambda_P;
  m.case_tag = c;
  switch (c) {
    case TransversalityCase::i:
      m.lambda_V = r;
      break;
    case TransversalityCase::ii:
      m.lambda_V = -r;
      break;
    case TransversalityCase::iii:
    case TransversalityCase::iv: {
      const double th = *theta;
      const bool ok = c == TransversalityCase::iv ? (th >= 0.0 && th <= std::numbers::pi / 2)
                                                  : (th >= -std::numbers::pi / 2 && th <= 0.0);
      if (!ok || !std::isfinite(th)) {
        throw std::invalid_argument("theta outside the interval of case " + std::string(to_string(c)));
      }
      m.lambda_E = -r * std::cos(th);
      m.lambda_V = -r * std::sin(th);
      m.theta = th;
      break;
    }
    case TransversalityCase::v:
      m.lambda_E = -r;
      break;
    case TransversalityCase::explicit_triple:
      break;
  }
  return m;
}

MultiplierTriple explicit_multipliers(double lambda_P, double lambda_E, double lambda_V) {
  MultiplierTriple m{lambda_P, lambda_E, lambda_V, TransversalityCase::explicit_triple, std::nullopt};
  if (!(lambda_P >= 0.0)) throw std::invalid_argument("lambda_P must be nonnegative");
  if (!(m.norm_defect() <= kNormTolerance)) {
    throw std::invalid_argument("multiplier triple is not on the unit sphere");
  }
  return m;
}

std::vector<MultiplierTriple> sweep_grid(TransversalityCase c, std::span<const double> lambda_P_points,
                                         std::span<const double> theta_points) {
  if (lambda_P_points.empty()) throw std::invalid_argument("sweep: lambda_P list is empty");
  if (case_uses_theta(c) && theta_points.empty()) {
    throw std::invalid_argument("sweep: theta list is empty");
  }
  if (!case_uses_theta(c) && !theta_points.empty()) {
    throw std::invalid_argument("sweep: theta given for a case without an angle");
  }
  for (double lp : lambda_P_points) {
    if (!(lp >= kLambdaMin)) {
      throw DegenerateMultiplier("sweep: lambda_P = " + std::to_string(lp) + " is below the floor");
    }
  }
  std::vector<MultiplierTriple> out;
  for (double lp : lambda_P_points) {
    if (case_uses_theta(c)) {
      for (double th : theta_points) out.push_back(from_case(c, lp, th));
    } else {
      out.push_back(from_case(c, lp));
    }
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::feasible: return "feasible";
    case Verdict::infeasible: return "infeasible";
    case Verdict::boundary: return "boundary";
  }
  return "?";
}

namespace {

Verdict against_upper_bound(const Estimate& e, double bound, double tol) {
  if (std::abs(e.value - bound) <= tol + 2.0 * e.std_error) return Verdict::boundary;
  return e.value < bound ? Verdict::feasible : Verdict::infeasible;
}

}  // namespace

FeasibilityReport classify_feasibility(const Estimate& J_A, const Estimate& var_xT, const LqParams& params,
                                       double tol) {
  FeasibilityReport r;
  r.agent_cost = against_upper_bound(J_A, params.W0, tol);
  r.variance = against_upper_bound(var_xT, params.R0, tol);
  r.variance_at_zero = std::abs(var_xT.value) <= tol + 2.0 * var_xT.std_error;

  const bool e_active = r.agent_cost == Verdict::boundary;
  const bool v_top = r.variance == Verdict::boundary;
  const bool v_zero = r.variance_at_zero;
  using C = TransversalityCase;
  if (v_zero) r.consistent_cases.push_back(C::i);
  if (v_top) r.consistent_cases.push_back(C::ii);
  if (e_active && v_zero) r.consistent_cases.push_back(C::iii);
  if (e_active && v_top) r.consistent_cases.push_back(C::iv);
  if (e_active) r.consistent_cases.push_back(C::v);
  return r;
}

}  // namespace mvcontract
