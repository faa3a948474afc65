#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvcontract/config.hpp"
#include "mvcontract/montecarlo.hpp"

namespace mvcontract {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitCheckFailed = 4,
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// `PASS name: detail` / `FAIL name: detail`
std::string format_check(const CheckResult& r);

/// Oracle suite behind `check`: terminal conditions, ansatz residual (with a
/// perturbed-solution negative control when no coefficient file is given),
/// mean dynamics, explicit R, Hamiltonian argmax, density martingale, b = 0
/// variance and multiplier normalization.
std::vector<CheckResult> run_oracle_suite(const RunConfig& cfg);

/// Weak-formulation suite behind `weakcheck`. Throws DegenerateSensitivity
/// when b = 0 makes the first-order condition undefined.
std::vector<CheckResult> run_weak_suite(const RunConfig& cfg);

/// Writes riccati.csv for the first multiplier point.
int run_riccati(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Writes eval.csv (one flushed row per sweep point) and prints a summary.
/// A blow-up at one point writes a row of nan with verdict `blowup`, the
/// sweep continues, and the exit code is 3. When `evaluations` is given it
/// receives the successful evaluations in grid order.
int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                 std::vector<ContractEvaluation>* evaluations = nullptr);
int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_weakcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs body and maps escaping exceptions to exit codes, printing the
/// message to err: validation errors → 2, blow-up/divergence → 3, other → 1.
int guarded(std::ostream& err, const std::function<int()>& body);

/// Header of eval.csv.
inline constexpr const char* kEvalCsvHeader =
    "lambda_P,theta,lambda_E,lambda_V,J_A,J_A_se,J_P,J_P_se,var_xT,var_xT_se,feasible_JA,feasible_var";

}  // namespace mvcontract
