#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mvcontract/lq_model.hpp"
#include "mvcontract/multipliers.hpp"

namespace mvcontract {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a CLI run needs. Defaults are the reference point
/// (a = b = σ = 1, α = 0.2, β = 1, T = 0.03, case iv, λ_P = 0.1, θ = π/2).
struct RunConfig {
  LqParams params;

  TransversalityCase case_tag = TransversalityCase::iv;
  std::vector<double> lambda_P = {0.1};
  std::vector<double> theta = {std::numbers::pi / 2};
  /// Only for case_tag = explicit (single λ_P point).
  std::optional<double> lambda_E;
  std::optional<double> lambda_V;

  std::size_t n_paths = 100000;
  std::size_t n_steps = 64;
  std::uint64_t seed = 1;
  P2DriftMode p2_mode = P2DriftMode::eta_equals_x;
  std::string out_dir = ".";
  unsigned workers = 0;

  double residual_tol = 1e-3;
  std::optional<double> feasibility_tol;  // default 1e-3·R0
  double blowup_bound = 1e8;
  std::size_t check_paths = 10000;
  std::vector<double> weak_thetas = {0.0, 0.5, 1.0, 2.0};
  double weak_effort = 1.0;
  double weak_cashflow = 0.5;
  /// Optional riccati.csv used by `check` instead of integrating.
  std::string coefficients_file;

  /// Throws ConfigError on any inconsistent or out-of-range field.
  void validate() const;
  double effective_feasibility_tol() const {
    return feasibility_tol ? *feasibility_tol : default_feasibility_tol(params);
  }
  /// The multiplier grid described by case_tag, lambda_P and theta.
  std::vector<MultiplierTriple> multipliers() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the flat `key = value` format. `#` starts a comment. Numbers may
/// be written with `pi` (e.g. `pi/2`, `0.25*pi`); lists are comma-separated
/// or `linspace(start, stop, count)`. Unknown or repeated keys are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);

/// Writes every field; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

/// Applies one `key = value` assignment (used for CLI/env overrides).
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Evaluates a scalar such as `-pi/2` or `1.5e-3`.
double parse_scalar(std::string_view text);
std::vector<double> parse_list(std::string_view text);

}  // namespace mvcontract
