#include "dbflu/sir.hpp"

#include <cmath>
#include <stdexcept>

namespace dbflu {

namespace {

constexpr double kMassSlack = 1e-8;

bool finite3(double a, double b, double c) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

}  // namespace

SirParams::SirParams(double s0_, double i0_, double beta_, double rho_)
    : s0(s0_), i0(i0_), r0(1.0 - s0_ - i0_), beta(beta_), rho(rho_) {
  if (!finite3(s0, i0, beta) || !std::isfinite(rho)) throw std::invalid_argument("SirParams: non-finite input");
  if (s0 < 0.0 || s0 > 1.0) throw std::invalid_argument("SirParams: s0 outside [0,1]");
  // i0 == 0 is admitted so the disease-free fixed point is representable;
  // the prior truncation keeps it strictly positive where that matters.
  if (i0 < 0.0 || i0 > 1.0) throw std::invalid_argument("SirParams: i0 outside [0,1]");
  if (r0 < -kMassSlack) throw std::invalid_argument("SirParams: s0 + i0 exceeds 1");
  if (r0 < 0.0) r0 = 0.0;
  if (!(beta > 0.0)) throw std::invalid_argument("SirParams: beta must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("SirParams: rho must be positive");
}

RkStage rk4_stages(const SirState& y, double beta, double gamma) {
  RkStage k;
  k.ks1 = -beta * y.s * y.i;
  k.ki1 = beta * y.s * y.i - gamma * y.i;
  k.kr1 = gamma * y.i;

  double s = y.s + 0.5 * k.ks1;
  double i = y.i + 0.5 * k.ki1;
  k.ks2 = -beta * s * i;
  k.ki2 = beta * s * i - gamma * i;
  k.kr2 = gamma * i;

  s = y.s + 0.5 * k.ks2;
  i = y.i + 0.5 * k.ki2;
  k.ks3 = -beta * s * i;
  k.ki3 = beta * s * i - gamma * i;
  k.kr3 = gamma * i;

  s = y.s + k.ks3;
  i = y.i + k.ki3;
  k.ks4 = -beta * s * i;
  k.ki4 = beta * s * i - gamma * i;
  k.kr4 = gamma * i;
  return k;
}

SirState rk4_step(const SirState& y, double beta, double gamma) {
  if (!finite3(y.s, y.i, y.r) || !std::isfinite(beta) || !std::isfinite(gamma)) {
    throw std::invalid_argument("rk4_step: non-finite input");
  }
  const RkStage k = rk4_stages(y, beta, gamma);
  SirState next;
  next.s = y.s + (k.ks1 + 2.0 * k.ks2 + 2.0 * k.ks3 + k.ks4) / 6.0;
  next.i = y.i + (k.ki1 + 2.0 * k.ki2 + 2.0 * k.ki3 + k.ki4) / 6.0;
  next.r = y.r + (k.kr1 + 2.0 * k.kr2 + 2.0 * k.kr3 + k.kr4) / 6.0;
  return next;
}

SirTrajectory solve_sir(const SirParams& params, int weeks) {
  if (weeks < 1) throw std::invalid_argument("solve_sir: weeks must be >= 1");
  SirTrajectory traj{Eigen::VectorXd(weeks), Eigen::VectorXd(weeks), Eigen::VectorXd(weeks), params};

  SirState y{params.s0, params.i0, params.r0};
  const double gamma = params.gamma();
  for (int t = 0; t < weeks; ++t) {
    if (t > 0) y = rk4_step(y, params.beta, gamma);
    // Round-off can push a compartment slightly negative near extinction.
    for (double* c : {&y.s, &y.i, &y.r}) {
      if (*c < 0.0 && *c > -kMassSlack) *c = 0.0;
      if (*c < -kMassSlack || *c > 1.0 + kMassSlack || !std::isfinite(*c)) {
        throw std::domain_error("solve_sir: trajectory left [0,1] (numerical blow-up)");
      }
    }
    traj.s(t) = y.s;
    traj.i(t) = y.i;
    traj.r(t) = y.r;
  }
  return traj;
}

EpidemicClass classify_epidemic(const SirParams& params) {
  return params.s0 > params.rho ? EpidemicClass::Epidemic : EpidemicClass::NonEpidemic;
}

}  // namespace dbflu
