#include "mvcontract/riccati.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mvcontract/errors.hpp"
#include "mvcontract/numerics.hpp"

namespace mvcontract {

namespace {

constexpr std::array<std::string_view, kNumCoefficients> kNames = {
    "A11", "A21", "B11", "B21", "A12", "A22", "B12", "B22", "A13", "A23", "B13", "B23"};

std::size_t idx(Coef c) { return static_cast<std::size_t>(c); }

// Closed-loop drift of (x, R) as linear forms in (x, E[x], R, E[R]), plus
// the induced linear dynamics of the means.
struct ClosedLoopForms {
  LinearForm x_drift;
  LinearForm R_drift;
  // m' = mm·m + mn·n,  n' = nm·m + nn·n   (m = E[x], n = E[R])
  double mm, mn, nm, nn;
};

LinearForm combine(double c0, const LinearForm& f0, double c1, const LinearForm& f1, double c2,
                   const LinearForm& f2) {
  return {c0 * f0.x + c1 * f1.x + c2 * f2.x, c0 * f0.mean_x + c1 * f1.mean_x + c2 * f2.mean_x,
          c0 * f0.R + c1 * f1.R + c2 * f2.R, c0 * f0.mean_R + c1 * f1.mean_R + c2 * f2.mean_R};
}

ClosedLoopForms closed_loop_forms(const RiccatiSolution::Row& c, const LqParams& prm, const MultiplierTriple& mult,
                                  P2DriftMode mode) {
  const double a = prm.a;
  const double b2 = prm.b * prm.b;
  const double c1 = b2 / mult.lambda_P;
  const double c2 = prm.b * p2_cashflow_weight(prm.b, mode) / mult.lambda_P;
  const auto p = RiccatiSolution::form_of(c, Adjoint::p);
  const auto P1 = RiccatiSolution::form_of(c, Adjoint::P1);
  const auto P2 = RiccatiSolution::form_of(c, Adjoint::P2);

  ClosedLoopForms f{};
  // a·x + b²p + b·s̄
  f.x_drift = combine(b2, p, c1, P1, c2, P2);
  f.x_drift.x += a;
  // a·R − b²(P1 + P2) + λ_E·b²·p
  f.R_drift = combine(mult.lambda_E * b2, p, -b2, P1, -b2, P2);
  f.R_drift.R += a;

  f.mm = f.x_drift.x + f.x_drift.mean_x;
  f.mn = f.x_drift.R + f.x_drift.mean_R;
  f.nm = f.R_drift.x + f.R_drift.mean_x;
  f.nn = f.R_drift.R + f.R_drift.mean_R;
  return f;
}

bool within_bound(const RiccatiSolution::Row& row, double bound) {
  for (double v : row) {
    if (!std::isfinite(v) || std::abs(v) > bound) return false;
  }
  return true;
}

RiccatiSolution::Row axpy(const RiccatiSolution::Row& y, double h, const RiccatiSolution::Row& k) {
  RiccatiSolution::Row out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view coefficient_name(Coef c) { return kNames[idx(c)]; }

RiccatiSolution::RiccatiSolution(TimeGrid grid, LqParams params, MultiplierTriple mult, P2DriftMode mode,
                                 std::vector<Row> rows)
    : grid_(grid), params_(params), mult_(mult), mode_(mode), rows_(std::move(rows)) {
  if (rows_.size() != grid_.n_points()) {
    throw std::invalid_argument("riccati solution: row count does not match the grid");
  }
}

RiccatiSolution::Row RiccatiSolution::interpolate(double t) const {
  const auto [k, frac] = grid_.locate(t);
  if (frac == 0.0) return rows_[k];
  Row out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - frac) * rows_[k][i] + frac * rows_[k + 1][i];
  return out;
}

LinearForm RiccatiSolution::form_of(const Row& row, Adjoint which) {
  const std::size_t base = 4 * static_cast<std::size_t>(which);
  return {row[base], row[base + 1], row[base + 2], row[base + 3]};
}

LinearForm RiccatiSolution::cashflow_form(std::size_t k) const {
  const double b = params_.b;
  const double w = p2_cashflow_weight(b, mode_);
  const auto P1 = form(Adjoint::P1, k);
  const auto P2 = form(Adjoint::P2, k);
  return combine(0.0, P1, b / mult_.lambda_P, P1, w / mult_.lambda_P, P2);
}

RiccatiSolution::Row terminal_coefficients(const LqParams& prm, const MultiplierTriple& mult) {
  RiccatiSolution::Row c{};
  c[idx(Coef::A11)] = prm.alpha;
  c[idx(Coef::A12)] = prm.alpha * mult.lambda_E + prm.beta * mult.lambda_P;
  c[idx(Coef::B12)] = -prm.alpha;
  c[idx(Coef::A13)] = -2.0 * mult.lambda_V;
  c[idx(Coef::A23)] = 2.0 * mult.lambda_V;
  return c;
}

RiccatiSolution::Row coefficient_rates(const RiccatiSolution::Row& c, const LqParams& prm,
                                       const MultiplierTriple& mult, P2DriftMode mode) {
  const auto f = closed_loop_forms(c, prm, mult, mode);
  const double a = prm.a;
  const auto p = RiccatiSolution::form_of(c, Adjoint::p);
  const auto P1 = RiccatiSolution::form_of(c, Adjoint::P1);
  const auto P2 = RiccatiSolution::form_of(c, Adjoint::P2);

  // Prescribed adjoint drifts as linear forms.
  const std::array<LinearForm, 3> target = {
      combine(-a, p, 0.0, p, 0.0, p),
      combine(-a, P1, -a, P2, 0.0, p),
      LinearForm{},
  };

  RiccatiSolution::Row rate{};
  for (std::size_t j = 0; j < 3; ++j) {
    const auto y = RiccatiSolution::form_of(c, static_cast<Adjoint>(j));
    const auto& tg = target[j];
    // Itô: dY = (A'x + B'R + C'm + D'n) dt + A dx + B dR + C dm + D dn.
    const double dA = tg.x - y.x * f.x_drift.x - y.R * f.R_drift.x;
    const double dB = tg.R - y.x * f.x_drift.R - y.R * f.R_drift.R;
    const double dC = tg.mean_x - y.x * f.x_drift.mean_x - y.R * f.R_drift.mean_x - y.mean_x * f.mm -
                      y.mean_R * f.nm;
    const double dD = tg.mean_R - y.x * f.x_drift.mean_R - y.R * f.R_drift.mean_R - y.mean_x * f.mn -
                      y.mean_R * f.nn;
    rate[4 * j] = dA;
    rate[4 * j + 1] = dC;
    rate[4 * j + 2] = dB;
    rate[4 * j + 3] = dD;
  }
  return rate;
}

RiccatiSolution integrate_riccati(const LqParams& params, const MultiplierTriple& mult, const TimeGrid& grid,
                                  const RiccatiOptions& options) {
  params.validate();
  if (!(mult.lambda_P >= kLambdaMin)) {
    throw DegenerateMultiplier("lambda_P = " + std::to_string(mult.lambda_P) + " is below the floor " +
                               std::to_string(kLambdaMin));
  }
  if (!(mult.norm_defect() <= kNormTolerance)) {
    throw std::invalid_argument("multiplier triple is not normalized");
  }
  if (std::abs(grid.t_end() - params.T) > 1e-12 * params.T) {
    throw std::invalid_argument("grid horizon does not match T");
  }

  const std::size_t n = grid.n_steps();
  std::vector<RiccatiSolution::Row> rows(grid.n_points());
  rows[n] = terminal_coefficients(params, mult);
  const double h = -grid.dt();
  const auto f = [&](const RiccatiSolution::Row& y) { return coefficient_rates(y, params, mult, options.mode); };
  for (std::size_t k = n; k > 0; --k) {
    const auto& y = rows[k];
    const auto k1 = f(y);
    const auto k2 = f(axpy(y, h / 2, k1));
    const auto k3 = f(axpy(y, h / 2, k2));
    const auto k4 = f(axpy(y, h, k3));
    auto& next = rows[k - 1];
    for (std::size_t i = 0; i < kNumCoefficients; ++i) {
      next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!within_bound(next, options.blowup_bound)) throw RiccatiBlowUp(grid.time(k - 1));
  }
  return RiccatiSolution(grid, params, mult, options.mode, std::move(rows));
}

MeanTrajectories integrate_means(const RiccatiSolution& sol, double x0, double R0) {
  const auto& grid = sol.grid();
  const std::size_t np = grid.n_points();
  MeanTrajectories m{grid, std::vector<double>(np), std::vector<double>(np), std::vector<double>(np),
                     std::vector<double>(np), std::vector<double>(np), std::vector<double>(np),
                     std::vector<double>(np)};
  const auto rate = [&](const RiccatiSolution::Row& row, double mx, double mR) {
    const auto f = closed_loop_forms(row, sol.params(), sol.multipliers(), sol.mode());
    return std::array<double, 2>{f.mm * mx + f.mn * mR, f.nm * mx + f.nn * mR};
  };
  m.m_x[0] = x0;
  m.m_R[0] = R0;
  const double h = grid.dt();
  for (std::size_t k = 0; k + 1 < np; ++k) {
    const auto& r0 = sol.row(k);
    const auto& r1 = sol.row(k + 1);
    RiccatiSolution::Row mid;
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (r0[i] + r1[i]);
    const double x = m.m_x[k], R = m.m_R[k];
    const auto k1 = rate(r0, x, R);
    const auto k2 = rate(mid, x + h / 2 * k1[0], R + h / 2 * k1[1]);
    const auto k3 = rate(mid, x + h / 2 * k2[0], R + h / 2 * k2[1]);
    const auto k4 = rate(r1, x + h * k3[0], R + h * k3[1]);
    m.m_x[k + 1] = x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    m.m_R[k + 1] = R + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  }
  const double b = sol.params().b;
  for (std::size_t k = 0; k < np; ++k) {
    const double mx = m.m_x[k], mR = m.m_R[k];
    const auto mean_of = [&](const LinearForm& f) { return f(mx, mR, mx, mR); };
    m.m_p[k] = mean_of(sol.form(Adjoint::p, k));
    m.m_P1[k] = mean_of(sol.form(Adjoint::P1, k));
    m.m_P2[k] = mean_of(sol.form(Adjoint::P2, k));
    m.m_s[k] = mean_of(sol.cashflow_form(k));
    m.m_e[k] = optimal_effort(b, m.m_p[k], m.m_s[k]);
  }
  return m;
}

AdjointState adjoint_state(const RiccatiSolution& sol, const MeanTrajectories& means, std::size_t k, double x,
                           double R) {
  const double mx = means.m_x[k], mR = means.m_R[k];
  const double sigma = sol.params().sigma;
  AdjointState s;
  s.p = sol.form(Adjoint::p, k)(x, R, mx, mR);
  s.P1 = sol.form(Adjoint::P1, k)(x, R, mx, mR);
  s.P2 = sol.form(Adjoint::P2, k)(x, R, mx, mR);
  s.q = sol.at(Coef::A11, k) * sigma;
  s.Q1 = sol.at(Coef::A12, k) * sigma;
  s.Q2 = sol.at(Coef::A13, k) * sigma;
  return s;
}

ResidualReport ansatz_residual(const RiccatiSolution& sol, const PathEnsemble& paths, unsigned workers) {
  if (!(sol.grid() == paths.grid())) throw std::invalid_argument("ansatz_residual: grid mismatch");
  if (paths.dim() < 2) throw std::invalid_argument("ansatz_residual: paths must carry (x, R)");

  const auto& grid = sol.grid();
  const std::size_t n = grid.n_steps();
  const double dt = grid.dt();
  const double a = sol.params().a;
  const double sigma = sol.params().sigma;
  const auto means = integrate_means(sol, paths.at(0, 0, 0), paths.at(0, 0, 1));

  const std::size_t n_paths = paths.n_paths();
  std::vector<std::array<double, 3>> path_max(n_paths), path_sum(n_paths);

  parallel_for(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dW(n);
    for (std::size_t i = begin; i < end; ++i) {
      paths.noise().fill(i, dW);
      std::array<double, 3> mx{}, sum{};
      for (std::size_t k = 0; k < n; ++k) {
        const double x0 = paths.at(i, k, 0), R0 = paths.at(i, k, 1);
        const double x1 = paths.at(i, k + 1, 0), R1 = paths.at(i, k + 1, 1);
        std::array<double, 3> y0{}, y1{};
        for (std::size_t j = 0; j < 3; ++j) {
          const auto which = static_cast<Adjoint>(j);
          y0[j] = sol.form(which, k)(x0, R0, means.m_x[k], means.m_R[k]);
          y1[j] = sol.form(which, k + 1)(x1, R1, means.m_x[k + 1], means.m_R[k + 1]);
        }
        const std::array<double, 3> prescribed = {-a * y0[0], -a * (y0[1] + y0[2]), 0.0};
        for (std::size_t j = 0; j < 3; ++j) {
          const double loading = sol.form(static_cast<Adjoint>(j), k + 1).x * sigma;
          const double drift = (y1[j] - y0[j] - loading * dW[k]) / dt;
          const double r = std::abs(drift - prescribed[j]);
          mx[j] = std::max(mx[j], r);
          sum[j] += r;
        }
      }
      path_max[i] = mx;
      path_sum[i] = sum;
    }
  });

  ResidualReport report;
  report.n_samples = n_paths * n;
  std::vector<double> sums(n_paths);
  for (std::size_t j = 0; j < 3; ++j) {
    double mx = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      mx = std::max(mx, path_max[i][j]);
      sums[i] = path_sum[i][j];
    }
    report.components[j].max_abs = mx;
    report.components[j].mean_abs = pairwise_sum(sums) / static_cast<double>(report.n_samples);
    report.max_abs = std::max(report.max_abs, mx);
  }
  return report;
}

std::vector<double> explicit_R(const RiccatiSolution& sol, std::span<const double> x_path) {
  const auto& grid = sol.grid();
  if (x_path.size() != grid.n_points()) throw std::invalid_argument("explicit_R: path length != grid points");
  const double a = sol.params().a;
  const double b2 = sol.params().b * sol.params().b;
  const double lE = sol.multipliers().lambda_E;
  const std::size_t np = grid.n_points();
  const double h = grid.dt();

  std::vector<double> decay(np), forcing(np);
  for (std::size_t k = 0; k < np; ++k) {
    decay[k] = b2 * sol.at(Coef::B12, k) + b2 * sol.at(Coef::B13, k) - lE * b2 * sol.at(Coef::B11, k) - a;
    forcing[k] = (lE * b2 * sol.at(Coef::A11, k) - b2 * sol.at(Coef::A12, k) - b2 * sol.at(Coef::A13, k)) *
                 x_path[k];
  }
  std::vector<double> R(np, 0.0);
  double C = 0.0;        // ∫₀ᵗ decay
  double integral = 0.0;  // ∫₀ᵗ e^{C} forcing
  double prev = forcing[0];
  for (std::size_t k = 1; k < np; ++k) {
    C += 0.5 * h * (decay[k - 1] + decay[k]);
    const double cur = std::exp(C) * forcing[k];
    integral += 0.5 * h * (prev + cur);
    prev = cur;
    R[k] = std::exp(-C) * integral;
  }
  return R;
}

void write_riccati_csv(const std::filesystem::path& file, const RiccatiSolution& sol,
                       const MeanTrajectories& means) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << "t";
  for (auto name : kNames) out << ',' << name;
  out << ",m_x,m_R\n";
  for (std::size_t k = 0; k < sol.grid().n_points(); ++k) {
    out << format_double(sol.grid().time(k));
    for (double v : sol.row(k)) out << ',' << format_double(v);
    out << ',' << format_double(means.m_x[k]) << ',' << format_double(means.m_R[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

RiccatiSolution read_riccati_csv(const std::filesystem::path& file, const LqParams& params,
                                 const MultiplierTriple& mult, P2DriftMode mode) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open coefficient file " + file.string());
  std::string line;
  std::getline(in, line);
  std::string expected = "t";
  for (auto name : kNames) expected += "," + std::string(name);
  if (line.rfind(expected, 0) != 0) throw std::invalid_argument("coefficient file has an unexpected header");

  std::vector<RiccatiSolution::Row> rows;
  double t_last = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    t_last = std::stod(cell);
    RiccatiSolution::Row row{};
    for (auto& v : row) {
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("coefficient file: short row");
      v = std::stod(cell);
    }
    rows.push_back(row);
  }
  if (rows.size() < 3) throw std::invalid_argument("coefficient file: need at least 3 rows");
  TimeGrid grid(t_last, rows.size() - 1);
  return RiccatiSolution(grid, params, mult, mode, std::move(rows));
}

}  // namespace mvcontract
