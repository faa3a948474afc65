#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "mvcontract/lq_model.hpp"
#include "mvcontract/multipliers.hpp"
#include "mvcontract/timegrid.hpp"

namespace mvcontract {

// Linear ansatz for the adjoint processes of the LQ Hidden Contract model:
//
//   p  = A11·x + B11·R + A21·E[x] + B21·E[R]
//   P1 = A12·x + B12·R + A22·E[x] + B22·E[R]
//   P2 = A13·x + B13·R + A23·E[x] + B23·E[R]
//
// Substituting into the adjoint FBSDE
//
//   dR  = (a·R − b²(P1 + P2) + λ_E·b²·p) dt
//   dp  = −a·p dt + q dW,           p(T)  = α·x(T)
//   dP1 = −a(P1 + P2) dt + Q1 dW,   P1(T) = −α·R(T) + (α·λ_E + β·λ_P)·x(T)
//   dP2 = Q2 dW,                    P2(T) = 2λ_V(E[x(T)] − x(T))
//
// with the closed-loop output drift a·x + b²p + b·s̄, s̄ = (b·P1 + w·P2)/λ_P,
// and matching the coefficients of x, R, E[x], E[R] gives twelve coupled
// Riccati equations integrated backward from T. The dW terms give
// q = A11·σ, Q1 = A12·σ, Q2 = A13·σ.

/// Column order used everywhere (including riccati.csv).
enum class Coef : std::size_t { A11, A21, B11, B21, A12, A22, B12, B22, A13, A23, B13, B23 };
inline constexpr std::size_t kNumCoefficients = 12;
std::string_view coefficient_name(Coef c);

enum class Adjoint : std::size_t { p = 0, P1 = 1, P2 = 2 };

/// a_x·x + a_mx·E[x] + a_R·R + a_mR·E[R]
struct LinearForm {
  double x = 0.0;
  double mean_x = 0.0;
  double R = 0.0;
  double mean_R = 0.0;

  double operator()(double xv, double Rv, double mxv, double mRv) const {
    return x * xv + R * Rv + mean_x * mxv + mean_R * mRv;
  }
};

struct RiccatiOptions {
  P2DriftMode mode = P2DriftMode::eta_equals_x;
  double blowup_bound = 1e8;
};

class RiccatiSolution {
 public:
  using Row = std::array<double, kNumCoefficients>;

  RiccatiSolution(TimeGrid grid, LqParams params, MultiplierTriple mult, P2DriftMode mode,
                  std::vector<Row> rows);

  const TimeGrid& grid() const { return grid_; }
  const LqParams& params() const { return params_; }
  const MultiplierTriple& multipliers() const { return mult_; }
  P2DriftMode mode() const { return mode_; }

  double at(Coef c, std::size_t k) const { return rows_[k][static_cast<std::size_t>(c)]; }
  const Row& row(std::size_t k) const { return rows_[k]; }
  /// Piecewise-linear interpolation between grid nodes.
  Row interpolate(double t) const;

  /// Ansatz coefficients of one adjoint component at node k.
  LinearForm form(Adjoint which, std::size_t k) const { return form_of(rows_[k], which); }
  static LinearForm form_of(const Row& row, Adjoint which);

  /// Coefficients of s̄ = (b·P1 + w·P2)/λ_P as a linear form.
  LinearForm cashflow_form(std::size_t k) const;

  /// Mutable access for building deliberately inconsistent solutions in
  /// verification runs.
  Row& mutable_row(std::size_t k) { return rows_[k]; }

 private:
  TimeGrid grid_;
  LqParams params_;
  MultiplierTriple mult_;
  P2DriftMode mode_;
  std::vector<Row> rows_;
};

/// Terminal values at t = T read off p(T), P1(T), P2(T) with η ≡ x.
RiccatiSolution::Row terminal_coefficients(const LqParams& params, const MultiplierTriple& mult);

/// Right-hand side d/dt of the twelve coefficients.
RiccatiSolution::Row coefficient_rates(const RiccatiSolution::Row& c, const LqParams& params,
                                       const MultiplierTriple& mult, P2DriftMode mode);

/// Classical RK4, backward from the terminal conditions on `grid`.
/// Throws DegenerateMultiplier for λ_P < kLambdaMin and RiccatiBlowUp when
/// a coefficient leaves [−bound, bound].
RiccatiSolution integrate_riccati(const LqParams& params, const MultiplierTriple& mult, const TimeGrid& grid,
                                  const RiccatiOptions& options = {});

/// E[x(t)] and E[R(t)] on the solution grid, plus means of the derived
/// processes through the ansatz.
struct MeanTrajectories {
  TimeGrid grid;
  std::vector<double> m_x;
  std::vector<double> m_R;
  std::vector<double> m_p;
  std::vector<double> m_P1;
  std::vector<double> m_P2;
  std::vector<double> m_s;
  std::vector<double> m_e;
};

/// Integrates the expectation of the closed-loop forward dynamics with RK4
/// (coefficients interpolated linearly at half steps). With the production
/// initial state (0, 0) the means vanish identically; a nonzero initial
/// state is accepted for verification runs.
MeanTrajectories integrate_means(const RiccatiSolution& sol, double x0 = 0.0, double R0 = 0.0);

/// p, P1, P2 and the diffusion coefficients q, Q1, Q2 at one point.
struct AdjointState {
  double p = 0.0;
  double P1 = 0.0;
  double P2 = 0.0;
  double q = 0.0;
  double Q1 = 0.0;
  double Q2 = 0.0;
};

AdjointState adjoint_state(const RiccatiSolution& sol, const MeanTrajectories& means, std::size_t k, double x,
                           double R);

struct ComponentResidual {
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

struct ResidualReport {
  std::array<ComponentResidual, 3> components;  // p, P1, P2
  double max_abs = 0.0;
  std::size_t n_samples = 0;
};

/// Drift consistency of the ansatz along simulated closed-loop paths.
///
/// For each component Y = form·(x, E[x], R, E[R]) and step k the discrete
/// drift (Y_{k+1} − Y_k − A1j(t_{k+1})·σ·ΔW_k)/Δt is compared with the
/// adjoint drift (−a·p, −a(P1 + P2), 0) evaluated at (t_k, state_k). Means
/// are integrated from the paths' initial state. The result is O(Δt) for a
/// consistent solution and O(1) otherwise.
ResidualReport ansatz_residual(const RiccatiSolution& sol, const PathEnsemble& paths, unsigned workers = 0);

/// R(t) from the integrating-factor formula
///   R(t) = e^{−C(t)} ∫₀ᵗ e^{C(s)} g(s) x̄(s) ds,
///   C' = b²B12 + b²B13 − λ_E b²B11 − a,  g = λ_E b²A11 − b²A12 − b²A13,
/// by composite trapezoidal quadrature; R(0) = 0. E-terms are omitted (they
/// vanish when x(0) = 0).
std::vector<double> explicit_R(const RiccatiSolution& sol, std::span<const double> x_path);

/// riccati.csv: t, twelve coefficients, m_x, m_R with full precision.
void write_riccati_csv(const std::filesystem::path& file, const RiccatiSolution& sol,
                       const MeanTrajectories& means);

/// Reads the twelve coefficient columns back; the grid is rebuilt from the
/// row count and the last t.
RiccatiSolution read_riccati_csv(const std::filesystem::path& file, const LqParams& params,
                                 const MultiplierTriple& mult, P2DriftMode mode);

}  // namespace mvcontract
