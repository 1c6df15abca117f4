#pragma once

#include <Eigen/Dense>

namespace dbflu {

// SIR compartmental parameters. The population splits into susceptible,
// infectious and recovered proportions; r0 is always derived as 1 - s0 - i0
// so the triple sums to one exactly. gamma is parameterized through
// rho = gamma / beta because the prior is placed on (i0, beta, rho).
struct SirParams {
  double s0;
  double i0;
  double r0;
  double beta;  // transmission rate per week
  double rho;   // gamma / beta

  SirParams(double s0_, double i0_, double beta_, double rho_);

  double gamma() const { return rho * beta; }
};

struct SirState {
  double s;
  double i;
  double r;
};

// Stage increments of one weekly RK4 step. Each stage conserves mass:
// ks + ki + kr = 0 up to round-off.
struct RkStage {
  double ks1, ks2, ks3, ks4;
  double ki1, ki2, ki3, ki4;
  double kr1, kr2, kr3, kr4;
};

RkStage rk4_stages(const SirState& state, double beta, double gamma);

// Advance one week with a single RK4 step of the SIR equations.
SirState rk4_step(const SirState& state, double beta, double gamma);

// Weekly S/I/R paths for season-weeks t = 1..T. Week 1 holds the initial
// condition; each later week is one RK4 step from the previous one.
struct SirTrajectory {
  Eigen::VectorXd s;
  Eigen::VectorXd i;
  Eigen::VectorXd r;
  SirParams params;

  int weeks() const { return static_cast<int>(i.size()); }
};

SirTrajectory solve_sir(const SirParams& params, int weeks);

enum class EpidemicClass { Epidemic, NonEpidemic };

// Epidemic iff s0 > rho; the tie s0 == rho is non-epidemic.
EpidemicClass classify_epidemic(const SirParams& params);

}  // namespace dbflu
