#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/math.hpp"
#include "dbflu/panel.hpp"
#include "dbflu/priors.hpp"
#include "dbflu/sir.hpp"

namespace dbflu {

// Beta data-model configuration. lambda is the concentration of
// y ~ Beta(lambda*pi, lambda*(1-pi)); it is fixed, not estimated.
struct DataModelConfig {
  double lambda = 4500.0;
  int weeks = kSeasonWeeks;
};

// Hyperprior constants. All Gammas are shape-rate.
struct HyperConfig {
  double tau_mu_T_shape = 2.0, tau_mu_T_rate = 2.0;   // precision of mu_T
  double tau_mu_shape = 2.0, tau_mu_rate = 0.02;      // precision of mu increments
  double a_delta_shape = 5.0, a_delta_rate = 1.0;     // hyper for delta precisions
  double b_delta_shape = 1.0, b_delta_rate = 10.0;
  double sigma_alpha_shape = 2.0, sigma_alpha_rate = 2.0;  // on the sd itself
  double alpha_center = 0.9;  // TN mean is logit(alpha_center)
  double alpha_lo = 0.02, alpha_hi = 0.98;
  double s0 = 0.9;  // identifiability constraint on the susceptible share
};

// One full assignment of the latent variables. The terminal season-specific
// discrepancy is pinned at -logit(I_T), so pi at the last week collapses to
// inv_logit(mu_T) for every season; both facts are maintained by the
// mutators and cannot be broken from outside.
class ModelState {
 public:
  ModelState(int n_seasons, int weeks);

  int n_seasons() const { return n_seasons_; }
  int weeks() const { return weeks_; }

  // Mechanistic block. Setting re-solves the weekly trajectory.
  void set_sir(int j, double i0, double beta, double rho);
  double i0(int j) const { return i0_(j); }
  double beta(int j) const { return beta_(j); }
  double rho(int j) const { return rho_(j); }
  const Eigen::VectorXd& infectious(int j) const { return infectious_[static_cast<std::size_t>(j)]; }
  double logit_infectious(int j, int t) const { return logit_infectious_[static_cast<std::size_t>(j)](t); }

  // Common discrepancy (logit scale), week index 0-based.
  double mu(int t) const { return mu_(t); }
  const Eigen::VectorXd& mu_vector() const { return mu_; }
  void set_mu(int t, double v) { mu_(t) = v; }
  void shift_mu(double eps) { mu_.array() += eps; }

  // Season discrepancy. Free sites are t = 0..weeks-2; t = weeks-1 is the
  // identifying constraint and only moves when the SIR block does.
  double delta(int j, int t) const { return delta_(j, t); }
  void set_delta(int j, int t, double v);
  Eigen::VectorXd delta_row(int j) const { return delta_.row(j); }

  double alpha(int j) const { return inv_logit(alpha_logit_(j)); }
  double alpha_logit(int j) const { return alpha_logit_(j); }
  void set_alpha_logit(int j, double x) { alpha_logit_(j) = x; }

  // Scale parameters, stored as the sampled coordinates: precisions for the
  // random-walk variances, the sd itself for sigma_alpha.
  double tau_mu_T = 1.0;
  double tau_mu = 100.0;
  Eigen::VectorXd tau_delta;
  double sigma_alpha = 1.0;
  double a_delta = 5.0;
  double b_delta = 0.1;

  double sigma2_mu_T() const { return 1.0 / tau_mu_T; }
  double sigma2_mu() const { return 1.0 / tau_mu; }
  double sigma2_delta(int j) const { return 1.0 / tau_delta(j); }

  // Eq. 5 composition; at the terminal week this is mu_T by construction.
  double logit_pi(int j, int t) const;
  double pi(int j, int t) const { return inv_logit(logit_pi(j, t)); }

 private:
  int n_seasons_;
  int weeks_;
  Eigen::VectorXd i0_, beta_, rho_;
  std::vector<Eigen::VectorXd> infectious_;
  std::vector<Eigen::VectorXd> logit_infectious_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd delta_;
  Eigen::VectorXd alpha_logit_;
};

// Beta(lambda*pi, lambda*(1-pi)) log density at y. Throws on y in {0,1};
// returns -inf for pi outside (0,1).
double log_lik_obs(double y, double pi, double lambda);

// Hot-path variant working from eta = logit(pi) and cached logs of the data.
inline double log_lik_obs_eta(double log_y, double log1m_y, double eta, double lambda, double lgamma_lambda) {
  const double a = lambda * inv_logit(eta);
  const double b = lambda * inv_logit(-eta);
  if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
  return lgamma_lambda - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * log_y + (b - 1.0) * log1m_y;
}

// Reverse random walk over the common discrepancy: N(0, sigma2_mu_T) at the
// final week, N(mu_{t+1}, sigma2_mu) walking back from it.
double log_prior_mu(const Eigen::VectorXd& mu, double sigma2_mu_T, double sigma2_mu);

// Autoregressive reverse walk over one season's discrepancy. delta must have
// its terminal element equal to -logit(i_terminal); that element carries no
// density of its own.
double log_prior_delta(const Eigen::VectorXd& delta, double alpha, double sigma2_delta, double i_terminal);

// All scale and hierarchy priors, including the truncated-Gaussian prior on
// logit(alpha_j). Out-of-support states score -inf rather than throwing.
double log_hyperpriors(const ModelState& state, const HyperConfig& hc);

// Full joint log density: observed-data likelihood (missing weeks contribute
// nothing), discrepancy walks, SIR prior per season, and hyperpriors.
double log_joint(const ModelState& state, const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                 const DataModelConfig& dmc, const HyperConfig& hc);

// Flat scalar view of a state, with matching labels; used for draw
// persistence and convergence diagnostics.
Eigen::VectorXd flatten_state(const ModelState& state);
std::vector<std::string> state_scalar_names(int n_seasons, int weeks, const std::vector<int>& seasons);

}  // namespace dbflu
