#include "dbflu/model.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dbflu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ModelState::ModelState(int n_seasons, int weeks)
    : tau_delta(Eigen::VectorXd::Constant(n_seasons, 50.0)),
      n_seasons_(n_seasons),
      weeks_(weeks),
      i0_(Eigen::VectorXd::Zero(n_seasons)),
      beta_(Eigen::VectorXd::Zero(n_seasons)),
      rho_(Eigen::VectorXd::Zero(n_seasons)),
      infectious_(static_cast<std::size_t>(n_seasons)),
      logit_infectious_(static_cast<std::size_t>(n_seasons)),
      mu_(Eigen::VectorXd::Zero(weeks)),
      delta_(Eigen::MatrixXd::Zero(n_seasons, weeks)),
      alpha_logit_(Eigen::VectorXd::Constant(n_seasons, logit(0.9))) {
  if (n_seasons < 1 || weeks < 2) throw std::invalid_argument("ModelState: need >= 1 season and >= 2 weeks");
  for (int j = 0; j < n_seasons; ++j) set_sir(j, 0.005, 0.8, 0.55 / 0.8);
}

void ModelState::set_sir(int j, double i0, double beta, double rho) {
  const SirParams params(0.9, i0, beta, rho);
  SirTrajectory traj = solve_sir(params, weeks_);
  i0_(j) = i0;
  beta_(j) = beta;
  rho_(j) = rho;
  auto& logit_i = logit_infectious_[static_cast<std::size_t>(j)];
  logit_i.resize(weeks_);
  for (int t = 0; t < weeks_; ++t) logit_i(t) = traj.i(t) > 0.0 ? logit(traj.i(t)) : -kInf;
  infectious_[static_cast<std::size_t>(j)] = std::move(traj.i);
  // Identifying constraint: the terminal discrepancy cancels the SIR term.
  delta_(j, weeks_ - 1) = -logit_i(weeks_ - 1);
}

void ModelState::set_delta(int j, int t, double v) {
  if (t < 0 || t >= weeks_ - 1) throw std::logic_error("ModelState::set_delta: terminal week is constrained");
  delta_(j, t) = v;
}

double ModelState::logit_pi(int j, int t) const {
  if (t == weeks_ - 1) return mu_(t);  // exact cancellation by the constraint
  return logit_infectious_[static_cast<std::size_t>(j)](t) + mu_(t) + delta_(j, t);
}

double log_lik_obs(double y, double pi, double lambda) {
  if (!(y > 0.0 && y < 1.0)) throw std::domain_error("log_lik_obs: y must lie strictly inside (0,1)");
  if (!(lambda > 0.0)) throw std::domain_error("log_lik_obs: lambda must be positive");
  if (!(pi > 0.0 && pi < 1.0)) return -kInf;
  return beta_lpdf(y, lambda * pi, lambda * (1.0 - pi));
}

double log_prior_mu(const Eigen::VectorXd& mu, double sigma2_mu_T, double sigma2_mu) {
  if (mu.size() < 2) throw std::invalid_argument("log_prior_mu: need at least two weeks");
  if (!(sigma2_mu_T > 0.0) || !(sigma2_mu > 0.0)) throw std::domain_error("log_prior_mu: variances must be positive");
  const auto T = mu.size();
  double lp = normal_lpdf(mu(T - 1), 0.0, std::sqrt(sigma2_mu_T));
  const double sd = std::sqrt(sigma2_mu);
  for (Eigen::Index t = 0; t + 1 < T; ++t) lp += normal_lpdf(mu(t), mu(t + 1), sd);
  return lp;
}

double log_prior_delta(const Eigen::VectorXd& delta, double alpha, double sigma2_delta, double i_terminal) {
  const auto T = delta.size();
  if (T < 2) throw std::invalid_argument("log_prior_delta: need at least two weeks");
  assert(delta(T - 1) == -logit(i_terminal) && "terminal delta must satisfy the identifying constraint");
  (void)i_terminal;
  if (!(sigma2_delta > 0.0)) return -kInf;
  const double sd = std::sqrt(sigma2_delta);
  double lp = 0.0;
  for (Eigen::Index t = 0; t + 1 < T; ++t) lp += normal_lpdf(delta(t), alpha * delta(t + 1), sd);
  return lp;
}

double log_hyperpriors(const ModelState& state, const HyperConfig& hc) {
  if (!(state.tau_mu_T > 0.0) || !(state.tau_mu > 0.0) || !(state.sigma_alpha > 0.0) ||
      !(state.a_delta > 0.0) || !(state.b_delta > 0.0)) {
    return -kInf;
  }
  double lp = gamma_lpdf(state.tau_mu_T, hc.tau_mu_T_shape, hc.tau_mu_T_rate);
  lp += gamma_lpdf(state.tau_mu, hc.tau_mu_shape, hc.tau_mu_rate);
  lp += gamma_lpdf(state.a_delta, hc.a_delta_shape, hc.a_delta_rate);
  lp += gamma_lpdf(state.b_delta, hc.b_delta_shape, hc.b_delta_rate);
  lp += gamma_lpdf(state.sigma_alpha, hc.sigma_alpha_shape, hc.sigma_alpha_rate);
  const double lo = logit(hc.alpha_lo);
  const double hi = logit(hc.alpha_hi);
  const double center = logit(hc.alpha_center);
  for (int j = 0; j < state.n_seasons(); ++j) {
    if (!(state.tau_delta(j) > 0.0)) return -kInf;
    lp += gamma_lpdf(state.tau_delta(j), state.a_delta, state.b_delta);
    lp += truncnorm_lpdf(state.alpha_logit(j), center, state.sigma_alpha, lo, hi);
    if (lp == -kInf) return -kInf;
  }
  return std::isnan(lp) ? -kInf : lp;
}

double log_joint(const ModelState& state, const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                 const DataModelConfig& dmc, const HyperConfig& hc) {
  if (panel.n_seasons() != state.n_seasons() || panel.weeks() != state.weeks()) {
    throw std::invalid_argument("log_joint: panel and state shapes differ");
  }
  double lp = log_hyperpriors(state, hc);
  if (lp == -kInf) return -kInf;
  lp += log_prior_mu(state.mu_vector(), state.sigma2_mu_T(), state.sigma2_mu());
  for (int j = 0; j < state.n_seasons(); ++j) {
    lp += prior.log_density(state.i0(j), state.beta(j), state.rho(j));
    if (lp == -kInf) return -kInf;
    lp += log_prior_delta(state.delta_row(j), state.alpha(j), state.sigma2_delta(j),
                          state.infectious(j)(state.weeks() - 1));
    for (int week = 1; week <= state.weeks(); ++week) {
      if (!panel.observed(j, week)) continue;
      lp += log_lik_obs(panel.value(j, week), state.pi(j, week - 1), dmc.lambda);
    }
    if (lp == -kInf) return -kInf;
  }
  return std::isnan(lp) ? -kInf : lp;
}

Eigen::VectorXd flatten_state(const ModelState& state) {
  const int J = state.n_seasons();
  const int T = state.weeks();
  Eigen::VectorXd out(3 * J + T + J * T + J + J + 5);
  Eigen::Index k = 0;
  for (int j = 0; j < J; ++j) {
    out(k++) = state.i0(j);
    out(k++) = state.beta(j);
    out(k++) = state.rho(j);
  }
  for (int t = 0; t < T; ++t) out(k++) = state.mu(t);
  for (int j = 0; j < J; ++j) {
    for (int t = 0; t < T; ++t) out(k++) = state.delta(j, t);
  }
  for (int j = 0; j < J; ++j) out(k++) = state.alpha(j);
  for (int j = 0; j < J; ++j) out(k++) = state.tau_delta(j);
  out(k++) = state.sigma_alpha;
  out(k++) = state.tau_mu_T;
  out(k++) = state.tau_mu;
  out(k++) = state.a_delta;
  out(k++) = state.b_delta;
  return out;
}

std::vector<std::string> state_scalar_names(int n_seasons, int weeks, const std::vector<int>& seasons) {
  auto season_label = [&](int j) {
    return j < static_cast<int>(seasons.size()) ? std::to_string(seasons[static_cast<std::size_t>(j)])
                                                : std::to_string(j);
  };
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(3 * n_seasons + weeks + n_seasons * weeks + 2 * n_seasons + 5));
  for (int j = 0; j < n_seasons; ++j) {
    names.push_back("i0[" + season_label(j) + "]");
    names.push_back("beta[" + season_label(j) + "]");
    names.push_back("rho[" + season_label(j) + "]");
  }
  for (int t = 1; t <= weeks; ++t) names.push_back("mu[" + std::to_string(t) + "]");
  for (int j = 0; j < n_seasons; ++j) {
    for (int t = 1; t <= weeks; ++t) {
      names.push_back("delta[" + season_label(j) + "][" + std::to_string(t) + "]");
    }
  }
  for (int j = 0; j < n_seasons; ++j) names.push_back("alpha[" + season_label(j) + "]");
  for (int j = 0; j < n_seasons; ++j) names.push_back("tau_delta[" + season_label(j) + "]");
  names.push_back("sigma_alpha");
  names.push_back("tau_mu_T");
  names.push_back("tau_mu");
  names.push_back("a_delta");
  names.push_back("b_delta");
  return names;
}

}  // namespace dbflu
