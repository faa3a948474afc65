#include "mvcontract/closed_loop.hpp"

#include <stdexcept>

namespace mvcontract {

ClosedLoopField::ClosedLoopField(const RiccatiSolution& sol, const MeanTrajectories& means)
    : sol_(&sol), means_(&means) {
  if (!(sol.grid() == means.grid) || means.m_x.size() != sol.grid().n_points() ||
      means.m_R.size() != sol.grid().n_points()) {
    throw std::invalid_argument("closed-loop field: solution and means are on different grids");
  }
}

ClosedLoopField::Controls ClosedLoopField::controls_from(const RiccatiSolution::Row& row, double mx, double mR,
                                                         double x, double R) const {
  const double b = sol_->params().b;
  Controls c;
  c.p = RiccatiSolution::form_of(row, Adjoint::p)(x, R, mx, mR);
  c.P1 = RiccatiSolution::form_of(row, Adjoint::P1)(x, R, mx, mR);
  c.P2 = RiccatiSolution::form_of(row, Adjoint::P2)(x, R, mx, mR);
  c.s = optimal_cashflow(b, c.P1, c.P2, sol_->multipliers().lambda_P, sol_->mode());
  c.e = optimal_effort(b, c.p, c.s);
  return c;
}

std::array<double, 2> ClosedLoopField::drift_from(const Controls& c, double x, double R) const {
  const auto& prm = sol_->params();
  const double b2 = prm.b * prm.b;
  return {prm.a * x + b2 * c.p + prm.b * c.s,
          prm.a * R - b2 * (c.P1 + c.P2) + sol_->multipliers().lambda_E * b2 * c.p};
}

ClosedLoopField::Controls ClosedLoopField::controls(std::size_t k, double x, double R) const {
  return controls_from(sol_->row(k), means_->m_x[k], means_->m_R[k], x, R);
}

ClosedLoopField::Controls ClosedLoopField::controls_at(double t, double x, double R) const {
  const auto [k, frac] = sol_->grid().locate(t);
  if (frac == 0.0) return controls(k, x, R);
  const double mx = (1.0 - frac) * means_->m_x[k] + frac * means_->m_x[k + 1];
  const double mR = (1.0 - frac) * means_->m_R[k] + frac * means_->m_R[k + 1];
  return controls_from(sol_->interpolate(t), mx, mR, x, R);
}

std::array<double, 2> ClosedLoopField::drift(std::size_t k, double x, double R) const {
  return drift_from(controls(k, x, R), x, R);
}

std::array<double, 2> ClosedLoopField::drift_at(double t, double x, double R) const {
  return drift_from(controls_at(t, x, R), x, R);
}

SdeSystem ClosedLoopField::as_sde() const {
  SdeSystem sys;
  sys.dim = 2;
  sys.drift = [this](double t, std::span<const double> s, std::span<double> out) {
    const auto d = drift_at(t, s[0], s[1]);
    out[0] = d[0];
    out[1] = d[1];
  };
  const double sigma = sol_->params().sigma;
  sys.diffusion = [sigma](double, std::span<const double>, std::span<double> out) {
    out[0] = sigma;
    out[1] = 0.0;
  };
  return sys;
}

ClosedLoopField closed_loop_field(const RiccatiSolution& sol, const MeanTrajectories& means) {
  return ClosedLoopField(sol, means);
}

}  // namespace mvcontract
