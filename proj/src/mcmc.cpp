#include "dbflu/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>

#include "dbflu/csv.hpp"
#include "dbflu/rng.hpp"

namespace dbflu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double lgamma_of(double lambda) {
  thread_local double cached_arg = -1.0;
  thread_local double cached_val = 0.0;
  if (lambda != cached_arg) {
    cached_arg = lambda;
    cached_val = std::lgamma(lambda);
  }
  return cached_val;
}

double lik_term(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int j, int t) {
  if (!p.observed(j, t + 1)) return 0.0;
  const double y = p.value(j, t + 1);
  return log_lik_obs_eta(std::log(y), std::log1p(-y), s.logit_pi(j, t), dmc.lambda, lgamma_of(dmc.lambda));
}
}  // namespace

SamplerConfig SamplerConfig::diagnostic() {
  SamplerConfig c;
  c.n_chains = 4;
  c.n_iter = 100000;
  c.thin = 20;
  return c;
}

SamplerConfig SamplerConfig::production() {
  SamplerConfig c;
  c.n_chains = 1;
  c.n_iter = 50000;
  c.thin = 10;
  return c;
}

SamplerConfig SamplerConfig::ci() {
  SamplerConfig c;
  c.n_chains = 1;
  c.n_iter = 10000;
  c.thin = 2;
  return c;
}

namespace blocks {

double sir_triple(const ModelState& s, const SeasonPanel& p, const TruncatedMvnPrior& prior,
                  const DataModelConfig& dmc, int j) {
  double lp = prior.log_density(s.i0(j), s.beta(j), s.rho(j));
  if (lp == -kInf) return -kInf;
  const int T = s.weeks();
  // The terminal-week likelihood depends only on mu_T; the one delta prior
  // term touching the constrained terminal delta does move with the triple.
  lp += normal_lpdf(s.delta(j, T - 2), s.alpha(j) * s.delta(j, T - 1), std::sqrt(s.sigma2_delta(j)));
  for (int t = 0; t < T - 1; ++t) lp += lik_term(s, p, dmc, j, t);
  return std::isnan(lp) ? -kInf : lp;
}

double mu_site(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int t) {
  const int T = s.weeks();
  const double sd_mu = std::sqrt(s.sigma2_mu());
  double lp = 0.0;
  if (t == T - 1) {
    lp += normal_lpdf(s.mu(T - 1), 0.0, std::sqrt(s.sigma2_mu_T()));
    lp += normal_lpdf(s.mu(T - 2), s.mu(T - 1), sd_mu);
  } else {
    lp += normal_lpdf(s.mu(t), s.mu(t + 1), sd_mu);
    if (t > 0) lp += normal_lpdf(s.mu(t - 1), s.mu(t), sd_mu);
  }
  for (int j = 0; j < s.n_seasons(); ++j) lp += lik_term(s, p, dmc, j, t);
  return std::isnan(lp) ? -kInf : lp;
}

double mu_shift(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc) {
  // Increment terms are invariant under a constant shift; only the terminal
  // anchor and the likelihood move.
  double lp = normal_lpdf(s.mu(s.weeks() - 1), 0.0, std::sqrt(s.sigma2_mu_T()));
  for (int j = 0; j < s.n_seasons(); ++j) {
    for (int t = 0; t < s.weeks(); ++t) lp += lik_term(s, p, dmc, j, t);
  }
  return std::isnan(lp) ? -kInf : lp;
}

// Joint slices used by the non-centered rescaling moves: the walk (or
// hierarchy) terms plus the scale parameter's own prior plus whatever
// likelihood the rescaled coordinates touch.
double mu_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc,
                       const HyperConfig& hc) {
  if (!(s.tau_mu > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.tau_mu, hc.tau_mu_shape, hc.tau_mu_rate) +
              log_prior_mu(s.mu_vector(), s.sigma2_mu_T(), s.sigma2_mu());
  for (int j = 0; j < s.n_seasons(); ++j) {
    for (int t = 0; t + 1 < s.weeks(); ++t) lp += lik_term(s, p, dmc, j, t);
  }
  return std::isnan(lp) ? -kInf : lp;
}

double delta_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int j) {
  if (!(s.tau_delta(j) > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.tau_delta(j), s.a_delta, s.b_delta);
  const double a = s.alpha(j);
  const double sd = std::sqrt(s.sigma2_delta(j));
  for (int t = 0; t + 1 < s.weeks(); ++t) {
    lp += normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
    lp += lik_term(s, p, dmc, j, t);
  }
  return std::isnan(lp) ? -kInf : lp;
}

double alpha_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc,
                          const HyperConfig& hc) {
  double lp = sigma_alpha_cond(s, hc);
  if (lp == -kInf) return -kInf;
  for (int j = 0; j < s.n_seasons(); ++j) {
    const double a = s.alpha(j);
    const double sd = std::sqrt(s.sigma2_delta(j));
    for (int t = 0; t + 1 < s.weeks(); ++t) {
      lp += normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
    }
  }
  (void)p;
  (void)dmc;
  return std::isnan(lp) ? -kInf : lp;
}

double week_translation(const ModelState& s, int t) {
  // mu_t up by eps and every season's delta_t down by eps leaves eta and the
  // likelihood untouched; only walk priors move. Not available at the
  // terminal week, whose deltas are pinned.
  const int T = s.weeks();
  const double sd_mu = std::sqrt(s.sigma2_mu());
  double lp = t == T - 1 ? 0.0 : normal_lpdf(s.mu(t), s.mu(t + 1), sd_mu);
  if (t > 0) lp += normal_lpdf(s.mu(t - 1), s.mu(t), sd_mu);
  for (int j = 0; j < s.n_seasons(); ++j) {
    const double a = s.alpha(j);
    const double sd = std::sqrt(s.sigma2_delta(j));
    lp += normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
    if (t > 0) lp += normal_lpdf(s.delta(j, t - 1), a * s.delta(j, t), sd);
  }
  return std::isnan(lp) ? -kInf : lp;
}

double delta_site(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int j, int t) {
  const double sd = std::sqrt(s.sigma2_delta(j));
  const double a = s.alpha(j);
  double lp = normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
  if (t > 0) lp += normal_lpdf(s.delta(j, t - 1), a * s.delta(j, t), sd);
  lp += lik_term(s, p, dmc, j, t);
  return std::isnan(lp) ? -kInf : lp;
}

double alpha_site(const ModelState& s, const HyperConfig& hc, int j) {
  double lp = truncnorm_lpdf(s.alpha_logit(j), logit(hc.alpha_center), s.sigma_alpha, logit(hc.alpha_lo),
                             logit(hc.alpha_hi));
  if (lp == -kInf) return -kInf;
  const double a = s.alpha(j);
  const double sd = std::sqrt(s.sigma2_delta(j));
  for (int t = 0; t + 1 < s.weeks(); ++t) lp += normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
  return std::isnan(lp) ? -kInf : lp;
}

double tau_mu_T_cond(const ModelState& s, const HyperConfig& hc) {
  if (!(s.tau_mu_T > 0.0)) return -kInf;
  return gamma_lpdf(s.tau_mu_T, hc.tau_mu_T_shape, hc.tau_mu_T_rate) +
         normal_lpdf(s.mu(s.weeks() - 1), 0.0, std::sqrt(s.sigma2_mu_T()));
}

double tau_mu_cond(const ModelState& s, const HyperConfig& hc) {
  if (!(s.tau_mu > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.tau_mu, hc.tau_mu_shape, hc.tau_mu_rate);
  const double sd = std::sqrt(s.sigma2_mu());
  for (int t = 0; t + 1 < s.weeks(); ++t) lp += normal_lpdf(s.mu(t), s.mu(t + 1), sd);
  return lp;
}

double tau_delta_cond(const ModelState& s, const HyperConfig& hc, int j) {
  (void)hc;
  if (!(s.tau_delta(j) > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.tau_delta(j), s.a_delta, s.b_delta);
  const double sd = std::sqrt(s.sigma2_delta(j));
  const double a = s.alpha(j);
  for (int t = 0; t + 1 < s.weeks(); ++t) lp += normal_lpdf(s.delta(j, t), a * s.delta(j, t + 1), sd);
  return lp;
}

double sigma_alpha_cond(const ModelState& s, const HyperConfig& hc) {
  if (!(s.sigma_alpha > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.sigma_alpha, hc.sigma_alpha_shape, hc.sigma_alpha_rate);
  const double lo = logit(hc.alpha_lo), hi = logit(hc.alpha_hi), center = logit(hc.alpha_center);
  for (int j = 0; j < s.n_seasons(); ++j) {
    lp += truncnorm_lpdf(s.alpha_logit(j), center, s.sigma_alpha, lo, hi);
    if (lp == -kInf) return -kInf;
  }
  return lp;
}

double a_delta_cond(const ModelState& s, const HyperConfig& hc) {
  if (!(s.a_delta > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.a_delta, hc.a_delta_shape, hc.a_delta_rate);
  for (int j = 0; j < s.n_seasons(); ++j) lp += gamma_lpdf(s.tau_delta(j), s.a_delta, s.b_delta);
  return lp;
}

double b_delta_cond(const ModelState& s, const HyperConfig& hc) {
  if (!(s.b_delta > 0.0)) return -kInf;
  double lp = gamma_lpdf(s.b_delta, hc.b_delta_shape, hc.b_delta_rate);
  for (int j = 0; j < s.n_seasons(); ++j) lp += gamma_lpdf(s.tau_delta(j), s.a_delta, s.b_delta);
  return lp;
}

}  // namespace blocks

namespace {

// Random-walk step size with batch adaptation toward a target acceptance
// rate during burn-in (Roberts & Rosenthal style increments).
struct AdaptiveScale {
  double log_step;
  double target;
  long accepted = 0;
  long proposed = 0;
  long batch = 0;

  AdaptiveScale(double step, double target_rate) : log_step(std::log(step)), target(target_rate) {}

  double step() const { return std::exp(log_step); }

  void record(bool accept, bool adapting, int batch_size) {
    ++proposed;
    if (accept) ++accepted;
    if (adapting && proposed >= batch_size) {
      ++batch;
      const double rate = static_cast<double>(accepted) / static_cast<double>(proposed);
      const double inc = std::min(0.05, 1.0 / std::sqrt(static_cast<double>(batch)));
      log_step += rate > target ? inc : -inc;
      log_step = std::clamp(log_step, std::log(1e-6), std::log(50.0));
      accepted = 0;
      proposed = 0;
    }
  }
};

// Log-Jacobian of the natural->unconstrained map used for the SIR proposal:
// scaled logits for i0 and rho, log for beta. Measured in natural space.
double sir_transform_logjac(double i0, double beta, double rho) {
  return std::log(i0 * (kPriorI0Max - i0) / kPriorI0Max) + std::log(beta) +
         std::log(rho * (kPriorRhoMax - rho) / kPriorRhoMax);
}

Eigen::Vector3d sir_to_unconstrained(double i0, double beta, double rho) {
  return {logit(i0 / kPriorI0Max), std::log(beta), logit(rho / kPriorRhoMax)};
}

// Proposal shape for one season's transformed SIR triple. The posterior sits
// on a thin correlated ridge, so the walk covariance is estimated from the
// burn-in history (frozen afterwards); the overall step size adapts
// separately toward the block target rate.
struct TripleProposal {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  long n = 0;
  Eigen::Matrix3d chol = Eigen::Matrix3d::Identity();

  void observe(const Eigen::Vector3d& u, bool adapting) {
    if (!adapting) return;
    sum += u;
    outer += u * u.transpose();
    ++n;
    if (n >= 100 && n % 100 == 0) {
      const Eigen::Vector3d mean = sum / static_cast<double>(n);
      Eigen::Matrix3d cov = outer / static_cast<double>(n) - mean * mean.transpose();
      cov += 1e-8 * Eigen::Matrix3d::Identity();
      const Eigen::LLT<Eigen::Matrix3d> llt(cov);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
  }
};

class Sampler {
 public:
  Sampler(const SeasonPanel& panel, const TruncatedMvnPrior& prior, const DataModelConfig& dmc,
          const HyperConfig& hc, const SamplerConfig& config, int chain_id)
      : panel_(panel),
        prior_(prior),
        dmc_(dmc),
        hc_(hc),
        config_(config),
        rng_(Rng::derive_seed(config.seed, static_cast<std::uint64_t>(chain_id), 0x5a17u)),
        state_(panel.n_seasons(), panel.weeks()),
        sir_scale_(static_cast<std::size_t>(panel.n_seasons()), AdaptiveScale(0.1, 0.234)),
        sir_proposal_(static_cast<std::size_t>(panel.n_seasons())),
        mu_scale_(static_cast<std::size_t>(panel.weeks()), AdaptiveScale(0.2, 0.44)),
        mu_shift_scale_(0.05, 0.44),
        mu_scale_scale_(0.2, 0.44),
        delta_scale_move_(static_cast<std::size_t>(panel.n_seasons()), AdaptiveScale(0.2, 0.44)),
        alpha_scale_move_(0.2, 0.44),
        delta_scale_(static_cast<std::size_t>(panel.n_seasons()), AdaptiveScale(0.2, 0.44)),
        translation_scale_(static_cast<std::size_t>(panel.weeks()), AdaptiveScale(0.2, 0.44)),
        alpha_scale_(static_cast<std::size_t>(panel.n_seasons()), AdaptiveScale(0.5, 0.44)),
        tau_mu_T_scale_(0.5, 0.44),
        tau_mu_scale_(0.5, 0.44),
        tau_delta_scale_(static_cast<std::size_t>(panel.n_seasons()), AdaptiveScale(0.5, 0.44)),
        sigma_alpha_scale_(0.5, 0.44),
        a_scale_(0.3, 0.44),
        b_scale_(0.3, 0.44) {
    summary_ = {{"sir", 0, 0},         {"mu_site", 0, 0},  {"mu_shift", 0, 0},    {"delta", 0, 0},
                {"delta_bridge", 0, 0}, {"translation", 0, 0}, {"mu_scale", 0, 0}, {"delta_scale", 0, 0},
                {"alpha_scale", 0, 0}, {"alpha", 0, 0},   {"tau_mu_T", 0, 0},    {"tau_mu", 0, 0},
                {"tau_delta", 0, 0},   {"sigma_alpha", 0, 0}, {"a_delta", 0, 0},  {"b_delta", 0, 0}};
    initialize();
  }

  std::vector<ModelState> run() {
    std::vector<ModelState> kept;
    kept.reserve(static_cast<std::size_t>(config_.draws_per_chain()));
    const int burn = config_.burn_in_iters();
    for (int iter = 1; iter <= config_.n_iter; ++iter) {
      adapting_ = iter <= burn;
      sweep(iter);
      if (iter > burn && (iter - burn) % config_.thin == 0) kept.push_back(state_);
    }
    return kept;
  }

  std::vector<BlockAcceptance> acceptance() const { return summary_; }

 private:
  void initialize() {
    const int J = state_.n_seasons();
    const int T = state_.weeks();

    // mu start: logit of the week-specific mean of observed wILI minus the
    // logit of the prior-mean infectious trajectory; unobserved weeks borrow
    // the next later value (the walk runs backward from week T).
    Eigen::VectorXd mu_start = Eigen::VectorXd::Zero(T);
    Eigen::VectorXd prior_traj = Eigen::VectorXd::Constant(T, 0.01);
    try {
      prior_traj = solve_sir(SirParams(hc_.s0, prior_.mean(0), prior_.mean(1), prior_.mean(2)), T).i;
    } catch (const std::exception&) {
      // fall back to a flat reference trajectory
    }
    Eigen::VectorXd fill = Eigen::VectorXd::Constant(T, std::numeric_limits<double>::quiet_NaN());
    for (int t = 0; t < T; ++t) {
      double sum = 0.0;
      int n = 0;
      for (int j = 0; j < J; ++j) {
        if (panel_.observed(j, t + 1)) {
          sum += panel_.value(j, t + 1);
          ++n;
        }
      }
      if (n > 0 && prior_traj(t) > 0.0) fill(t) = logit(sum / n) - logit(prior_traj(t));
    }
    double carry = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      if (std::isfinite(fill(t))) carry = fill(t);
      mu_start(t) = carry;
    }

    for (int attempt = 0; attempt < config_.max_init_attempts; ++attempt) {
      for (int j = 0; j < J; ++j) {
        const auto draw = sample_prior(prior_, rng_);
        state_.set_sir(j, draw[0], draw[1], draw[2]);
        for (int t = 0; t + 1 < T; ++t) state_.set_delta(j, t, 0.0);
        state_.set_alpha_logit(j, logit(hc_.alpha_center));
        state_.tau_delta(j) = hc_.a_delta_shape / hc_.a_delta_rate / (hc_.b_delta_shape / hc_.b_delta_rate);
      }
      for (int t = 0; t < T; ++t) state_.set_mu(t, mu_start(t));
      state_.tau_mu_T = hc_.tau_mu_T_shape / hc_.tau_mu_T_rate;
      state_.tau_mu = hc_.tau_mu_shape / hc_.tau_mu_rate;
      state_.sigma_alpha = hc_.sigma_alpha_shape / hc_.sigma_alpha_rate;
      state_.a_delta = hc_.a_delta_shape / hc_.a_delta_rate;
      state_.b_delta = hc_.b_delta_shape / hc_.b_delta_rate;
      if (std::isfinite(log_joint(state_, panel_, prior_, dmc_, hc_))) return;
    }
    throw InitializationFailed("run_chain: no finite-density start after 100 prior draws");
  }

  bool accept(double log_ratio) {
    if (log_ratio >= 0.0) return true;
    if (log_ratio == -kInf) return false;
    return std::log(rng_.uniform()) < log_ratio;
  }

  void update_sir(int j) {
    const double old_i0 = state_.i0(j), old_beta = state_.beta(j), old_rho = state_.rho(j);
    const double cur = blocks::sir_triple(state_, panel_, prior_, dmc_, j) +
                       sir_transform_logjac(old_i0, old_beta, old_rho);
    auto& scale = sir_scale_[static_cast<std::size_t>(j)];
    auto& shape = sir_proposal_[static_cast<std::size_t>(j)];
    const Eigen::Vector3d old_u = sir_to_unconstrained(old_i0, old_beta, old_rho);
    shape.observe(old_u, adapting_);
    Eigen::Vector3d z;
    z << rng_.normal(), rng_.normal(), rng_.normal();
    const Eigen::Vector3d u = old_u + scale.step() * (shape.chol * z);
    const double new_i0 = kPriorI0Max * inv_logit(u(0));
    const double new_beta = std::exp(u(1));
    const double new_rho = kPriorRhoMax * inv_logit(u(2));

    bool ok = new_i0 > 0.0 && new_i0 < kPriorI0Max && new_beta > 0.0 && std::isfinite(new_beta) &&
              new_rho > 0.0 && new_rho < kPriorRhoMax;
    double log_ratio = -kInf;
    if (ok) {
      try {
        state_.set_sir(j, new_i0, new_beta, new_rho);
        log_ratio = blocks::sir_triple(state_, panel_, prior_, dmc_, j) +
                    sir_transform_logjac(new_i0, new_beta, new_rho) - cur;
      } catch (const std::domain_error&) {
        ok = false;  // trajectory blow-up: treat as zero density
      }
    }
    const bool acc = ok && accept(log_ratio);
    if (!acc) state_.set_sir(j, old_i0, old_beta, old_rho);
    scale.record(acc, adapting_, config_.adapt_batch);
    tally("sir", acc);
  }

  void update_mu_site(int t) {
    auto& scale = mu_scale_[static_cast<std::size_t>(t)];
    const double old_v = state_.mu(t);
    const double cur = blocks::mu_site(state_, panel_, dmc_, t);
    state_.set_mu(t, old_v + scale.step() * rng_.normal());
    const double log_ratio = blocks::mu_site(state_, panel_, dmc_, t) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) state_.set_mu(t, old_v);
    scale.record(acc, adapting_, config_.adapt_batch);
    tally("mu_site", acc);
  }

  void update_mu_shift() {
    const double cur = blocks::mu_shift(state_, panel_, dmc_);
    const double eps = mu_shift_scale_.step() * rng_.normal();
    state_.shift_mu(eps);
    const double log_ratio = blocks::mu_shift(state_, panel_, dmc_) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) state_.shift_mu(-eps);
    mu_shift_scale_.record(acc, adapting_, 10);
    tally("mu_shift", acc);
  }

  void update_delta(int j, int t) {
    auto& scale = delta_scale_[static_cast<std::size_t>(j)];
    const double old_v = state_.delta(j, t);
    const double cur = blocks::delta_site(state_, panel_, dmc_, j, t);
    state_.set_delta(j, t, old_v + scale.step() * rng_.normal());
    const double log_ratio = blocks::delta_site(state_, panel_, dmc_, j, t) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) state_.set_delta(j, t, old_v);
    scale.record(acc, adapting_, config_.adapt_batch);
    tally("delta", acc);
  }

  // Exact conditional draw of a season's discrepancies over a maximal run of
  // unobserved weeks. With no likelihood terms the run is a Gaussian AR
  // bridge between its fixed neighbors, so this is a Gibbs step (always
  // accepted); it unsticks the long tail of partially observed seasons that
  // single-site walks traverse in O(T^2) sweeps.
  void update_delta_bridge(int j) {
    const int T = state_.weeks();
    const double alpha = state_.alpha(j);
    const double tau = state_.tau_delta(j);
    int t = 0;
    while (t < T - 1) {
      if (panel_.observed(j, t + 1)) {
        ++t;
        continue;
      }
      int b = t;
      while (b + 1 < T - 1 && !panel_.observed(j, b + 2)) ++b;
      const int n = b - t + 1;
      // Quadratic form from the walk terms touching x_t..x_b: term s is
      // tau*(delta_s - alpha*delta_{s+1})^2 for s in [t-1, b].
      Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
      for (int s = t - 1; s <= b; ++s) {
        const bool left_free = s >= t;
        const bool right_free = s + 1 <= b;
        if (left_free && right_free) {
          prec(s - t, s - t) += tau;
          prec(s + 1 - t, s + 1 - t) += alpha * alpha * tau;
          prec(s - t, s + 1 - t) -= alpha * tau;
          prec(s + 1 - t, s - t) -= alpha * tau;
        } else if (left_free) {
          prec(s - t, s - t) += tau;
          lin(s - t) += alpha * tau * state_.delta(j, s + 1);
        } else if (s >= 0 && right_free) {
          prec(s + 1 - t, s + 1 - t) += alpha * alpha * tau;
          lin(s + 1 - t) += alpha * tau * state_.delta(j, s);
        }
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(prec);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd mean = llt.solve(lin);
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = rng_.normal();
        const Eigen::VectorXd draw = mean + llt.matrixU().solve(z);
        for (int i = 0; i < n; ++i) state_.set_delta(j, t + i, draw(i));
        tally("delta_bridge", true);
      }
      t = b + 1;
    }
  }

  // Likelihood-invariant ridge move: mu_t and the week-t deltas translate
  // in opposite directions.
  void update_translation(int t) {
    auto& scale = translation_scale_[static_cast<std::size_t>(t)];
    const double cur = blocks::week_translation(state_, t);
    const double eps = scale.step() * rng_.normal();
    state_.set_mu(t, state_.mu(t) + eps);
    for (int j = 0; j < state_.n_seasons(); ++j) state_.set_delta(j, t, state_.delta(j, t) - eps);
    const double log_ratio = blocks::week_translation(state_, t) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) {
      state_.set_mu(t, state_.mu(t) - eps);
      for (int j = 0; j < state_.n_seasons(); ++j) state_.set_delta(j, t, state_.delta(j, t) + eps);
    }
    scale.record(acc, adapting_, config_.adapt_batch);
    tally("translation", acc);
  }

  // Non-centered rescaling: scale the mu path about its terminal anchor
  // while moving tau_mu the opposite way, residuals held fixed. Unsticks the
  // scale/vector funnel that single-site walks cross in O(T^2) sweeps.
  void update_mu_scale() {
    const int T = state_.weeks();
    const double cur = blocks::mu_scale_target(state_, panel_, dmc_, hc_);
    const double eps = mu_scale_scale_.step() * rng_.normal();
    const double factor = std::exp(eps);
    const Eigen::VectorXd old_mu = state_.mu_vector();
    const double old_tau = state_.tau_mu;
    const double anchor = old_mu(T - 1);
    for (int t = 0; t + 1 < T; ++t) state_.set_mu(t, anchor + (old_mu(t) - anchor) * factor);
    state_.tau_mu = old_tau * std::exp(-2.0 * eps);
    const double log_ratio = blocks::mu_scale_target(state_, panel_, dmc_, hc_) - cur +
                             static_cast<double>(T - 1) * eps - 2.0 * eps;
    const bool acc = accept(log_ratio);
    if (!acc) {
      for (int t = 0; t + 1 < T; ++t) state_.set_mu(t, old_mu(t));
      state_.tau_mu = old_tau;
    }
    mu_scale_scale_.record(acc, adapting_, 10);
    tally("mu_scale", acc);
  }

  // Same trick for one season's discrepancy walk about the pinned terminal.
  void update_delta_scale(int j) {
    const int T = state_.weeks();
    const double cur = blocks::delta_scale_target(state_, panel_, dmc_, j);
    auto& scale = delta_scale_move_[static_cast<std::size_t>(j)];
    const double eps = scale.step() * rng_.normal();
    const double factor = std::exp(eps);
    const Eigen::VectorXd old_delta = state_.delta_row(j);
    const double old_tau = state_.tau_delta(j);
    const double alpha = state_.alpha(j);
    double next_new = old_delta(T - 1);
    for (int t = T - 2; t >= 0; --t) {
      const double resid = old_delta(t) - alpha * old_delta(t + 1);
      next_new = alpha * next_new + resid * factor;
      state_.set_delta(j, t, next_new);
    }
    state_.tau_delta(j) = old_tau * std::exp(-2.0 * eps);
    const double log_ratio = blocks::delta_scale_target(state_, panel_, dmc_, j) - cur +
                             static_cast<double>(T - 1) * eps - 2.0 * eps;
    const bool acc = accept(log_ratio);
    if (!acc) {
      for (int t = 0; t + 1 < T; ++t) state_.set_delta(j, t, old_delta(t));
      state_.tau_delta(j) = old_tau;
    }
    scale.record(acc, adapting_, 10);
    tally("delta_scale", acc);
  }

  // And for the autoregression hierarchy: spread the alpha logits about
  // their prior center together with sigma_alpha.
  void update_alpha_scale() {
    const int J = state_.n_seasons();
    const double cur = blocks::alpha_scale_target(state_, panel_, dmc_, hc_);
    const double eps = alpha_scale_move_.step() * rng_.normal();
    const double factor = std::exp(eps);
    const double center = logit(hc_.alpha_center);
    Eigen::VectorXd old_x(J);
    for (int j = 0; j < J; ++j) old_x(j) = state_.alpha_logit(j);
    const double old_sigma = state_.sigma_alpha;
    for (int j = 0; j < J; ++j) state_.set_alpha_logit(j, center + (old_x(j) - center) * factor);
    state_.sigma_alpha = old_sigma * factor;
    const double log_ratio = blocks::alpha_scale_target(state_, panel_, dmc_, hc_) - cur +
                             static_cast<double>(J) * eps + eps;
    const bool acc = accept(log_ratio);
    if (!acc) {
      for (int j = 0; j < J; ++j) state_.set_alpha_logit(j, old_x(j));
      state_.sigma_alpha = old_sigma;
    }
    alpha_scale_move_.record(acc, adapting_, 10);
    tally("alpha_scale", acc);
  }

  void update_alpha(int j) {
    auto& scale = alpha_scale_[static_cast<std::size_t>(j)];
    const double old_x = state_.alpha_logit(j);
    const double cur = blocks::alpha_site(state_, hc_, j);
    state_.set_alpha_logit(j, old_x + scale.step() * rng_.normal());
    const double log_ratio = blocks::alpha_site(state_, hc_, j) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) state_.set_alpha_logit(j, old_x);
    scale.record(acc, adapting_, config_.adapt_batch);
    tally("alpha", acc);
  }

  // Generic log-scale random walk on a positive scalar; `target` evaluates
  // the natural-coordinate conditional, the log-Jacobian is added here.
  template <typename Getter, typename Setter, typename Target>
  void update_positive(Getter get, Setter set, Target target, AdaptiveScale& scale, const char* label) {
    const double old_v = get();
    const double cur = target() + std::log(old_v);
    set(old_v * std::exp(scale.step() * rng_.normal()));
    const double log_ratio = target() + std::log(get()) - cur;
    const bool acc = accept(log_ratio);
    if (!acc) set(old_v);
    scale.record(acc, adapting_, config_.adapt_batch);
    tally(label, acc);
  }

  void sweep(int iter) {
    for (int j = 0; j < state_.n_seasons(); ++j) update_sir(j);
    for (int t = 0; t < state_.weeks(); ++t) update_mu_site(t);
    if (iter % config_.mu_shift_period == 0) update_mu_shift();
    if (iter % config_.mu_shift_period == 0) update_mu_scale();
    for (int j = 0; j < state_.n_seasons(); ++j) {
      for (int t = 0; t + 1 < state_.weeks(); ++t) update_delta(j, t);
      update_delta_bridge(j);
    }
    for (int t = 0; t + 1 < state_.weeks(); ++t) update_translation(t);
    if (iter % config_.mu_shift_period == 0) {
      for (int j = 0; j < state_.n_seasons(); ++j) update_delta_scale(j);
    }
    for (int j = 0; j < state_.n_seasons(); ++j) update_alpha(j);
    if (iter % config_.mu_shift_period == 0) update_alpha_scale();
    update_positive([&] { return state_.tau_mu_T; }, [&](double v) { state_.tau_mu_T = v; },
                    [&] { return blocks::tau_mu_T_cond(state_, hc_); }, tau_mu_T_scale_, "tau_mu_T");
    update_positive([&] { return state_.tau_mu; }, [&](double v) { state_.tau_mu = v; },
                    [&] { return blocks::tau_mu_cond(state_, hc_); }, tau_mu_scale_, "tau_mu");
    for (int j = 0; j < state_.n_seasons(); ++j) {
      update_positive([&] { return state_.tau_delta(j); }, [&](double v) { state_.tau_delta(j) = v; },
                      [&] { return blocks::tau_delta_cond(state_, hc_, j); },
                      tau_delta_scale_[static_cast<std::size_t>(j)], "tau_delta");
    }
    update_positive([&] { return state_.sigma_alpha; }, [&](double v) { state_.sigma_alpha = v; },
                    [&] { return blocks::sigma_alpha_cond(state_, hc_); }, sigma_alpha_scale_, "sigma_alpha");
    update_positive([&] { return state_.a_delta; }, [&](double v) { state_.a_delta = v; },
                    [&] { return blocks::a_delta_cond(state_, hc_); }, a_scale_, "a_delta");
    update_positive([&] { return state_.b_delta; }, [&](double v) { state_.b_delta = v; },
                    [&] { return blocks::b_delta_cond(state_, hc_); }, b_scale_, "b_delta");
  }

  void tally(const std::string& block, bool acc) {
    for (auto& s : summary_) {
      if (s.block == block) {
        ++s.proposed;
        if (acc) ++s.accepted;
        return;
      }
    }
  }

  const SeasonPanel& panel_;
  const TruncatedMvnPrior& prior_;
  DataModelConfig dmc_;
  HyperConfig hc_;
  SamplerConfig config_;
  Rng rng_;
  ModelState state_;
  bool adapting_ = true;

  std::vector<AdaptiveScale> sir_scale_;
  std::vector<TripleProposal> sir_proposal_;
  std::vector<AdaptiveScale> mu_scale_;
  AdaptiveScale mu_shift_scale_;
  AdaptiveScale mu_scale_scale_;
  std::vector<AdaptiveScale> delta_scale_move_;
  AdaptiveScale alpha_scale_move_;
  std::vector<AdaptiveScale> delta_scale_;
  std::vector<AdaptiveScale> translation_scale_;
  std::vector<AdaptiveScale> alpha_scale_;
  AdaptiveScale tau_mu_T_scale_;
  AdaptiveScale tau_mu_scale_;
  std::vector<AdaptiveScale> tau_delta_scale_;
  AdaptiveScale sigma_alpha_scale_;
  AdaptiveScale a_scale_;
  AdaptiveScale b_scale_;
  std::vector<BlockAcceptance> summary_;
};

}  // namespace

std::vector<ModelState> run_chain(const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                                  const DataModelConfig& dmc, const HyperConfig& hc,
                                  const SamplerConfig& config, int chain_id,
                                  std::vector<BlockAcceptance>* acceptance) {
  if (panel.n_seasons() < 1) throw std::invalid_argument("run_chain: empty panel");
  if (config.draws_per_chain() < 1) throw std::invalid_argument("run_chain: config keeps no draws");
  Sampler sampler(panel, prior, dmc, hc, config, chain_id);
  auto kept = sampler.run();
  if (acceptance) *acceptance = sampler.acceptance();
  return kept;
}

double gelman_rubin(const std::vector<Eigen::VectorXd>& chains, bool* degenerate) {
  const auto m = chains.size();
  if (m < 2) throw std::invalid_argument("gelman_rubin: need at least 2 chains");
  const auto n = chains[0].size();
  if (n < 10) throw std::invalid_argument("gelman_rubin: chains shorter than 10");
  for (const auto& c : chains) {
    if (c.size() != n) throw std::invalid_argument("gelman_rubin: chains of unequal length");
  }
  Eigen::VectorXd means(static_cast<Eigen::Index>(m));
  Eigen::VectorXd vars(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    means(static_cast<Eigen::Index>(i)) = chains[i].mean();
    vars(static_cast<Eigen::Index>(i)) =
        (chains[i].array() - means(static_cast<Eigen::Index>(i))).square().sum() / static_cast<double>(n - 1);
  }
  const double w = vars.mean();
  const double grand = means.mean();
  const double b_over_n = (means.array() - grand).square().sum() / static_cast<double>(m - 1);
  if (degenerate) *degenerate = false;
  if (!(w > 0.0) || !(b_over_n > 0.0)) {
    if (degenerate) *degenerate = true;
    return 1.0;
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double v_hat = (nn - 1.0) / nn * w + (1.0 + 1.0 / mm) * b_over_n;
  return std::sqrt(v_hat / w);
}

int PosteriorDraws::n_total() const {
  int n = 0;
  for (const auto& c : chains) n += static_cast<int>(c.size());
  return n;
}

const ModelState& PosteriorDraws::draw(int k) const {
  for (const auto& c : chains) {
    if (k < static_cast<int>(c.size())) return c[static_cast<std::size_t>(k)];
    k -= static_cast<int>(c.size());
  }
  throw std::out_of_range("PosteriorDraws::draw");
}

PosteriorDraws sample_posterior(const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                                const DataModelConfig& dmc, const HyperConfig& hc, const SamplerConfig& config) {
  PosteriorDraws out;
  out.seed = config.seed;
  out.seasons = panel.seasons;
  out.chains.resize(static_cast<std::size_t>(config.n_chains));
  std::vector<std::vector<BlockAcceptance>> accs(static_cast<std::size_t>(config.n_chains));

  std::vector<std::future<std::vector<ModelState>>> futures;
  futures.reserve(static_cast<std::size_t>(config.n_chains));
  for (int c = 0; c < config.n_chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      return run_chain(panel, prior, dmc, hc, config, c, &accs[static_cast<std::size_t>(c)]);
    }));
  }
  for (int c = 0; c < config.n_chains; ++c) out.chains[static_cast<std::size_t>(c)] = futures[static_cast<std::size_t>(c)].get();

  // Pool acceptance counts across chains by block name.
  for (const auto& chain_acc : accs) {
    for (const auto& a : chain_acc) {
      bool found = false;
      for (auto& s : out.acceptance) {
        if (s.block == a.block) {
          s.accepted += a.accepted;
          s.proposed += a.proposed;
          found = true;
        }
      }
      if (!found) out.acceptance.push_back(a);
    }
  }

  if (config.n_chains >= 2) {
    out.convergence.computed = true;
    out.convergence.names = state_scalar_names(panel.n_seasons(), panel.weeks(), panel.seasons);
    const auto n_scalars = static_cast<Eigen::Index>(out.convergence.names.size());
    out.convergence.rhat.resize(n_scalars);
    out.convergence.degenerate.assign(static_cast<std::size_t>(n_scalars), false);
    const int per_chain = static_cast<int>(out.chains[0].size());
    std::vector<Eigen::MatrixXd> flat(static_cast<std::size_t>(config.n_chains));
    for (int c = 0; c < config.n_chains; ++c) {
      flat[static_cast<std::size_t>(c)].resize(per_chain, n_scalars);
      for (int k = 0; k < per_chain; ++k) {
        flat[static_cast<std::size_t>(c)].row(k) = flatten_state(out.chains[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)]).transpose();
      }
    }
    double max_rhat = 0.0;
    for (Eigen::Index s = 0; s < n_scalars; ++s) {
      std::vector<Eigen::VectorXd> cols;
      cols.reserve(static_cast<std::size_t>(config.n_chains));
      for (int c = 0; c < config.n_chains; ++c) cols.push_back(flat[static_cast<std::size_t>(c)].col(s));
      bool degen = false;
      const double r = gelman_rubin(cols, &degen);
      out.convergence.rhat(s) = r;
      out.convergence.degenerate[static_cast<std::size_t>(s)] = degen;
      if (!degen) max_rhat = std::max(max_rhat, r);
      if (!degen && r >= 1.1) {
        out.convergence.warnings.push_back("R-hat >= 1.1 for " + out.convergence.names[static_cast<std::size_t>(s)] +
                                           " (" + format_double(r) + ")");
      }
    }
    out.convergence.max_rhat = max_rhat;
  }
  return out;
}

void write_draws(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_draws: cannot open " + path);
  out << "chain,iteration,scalar,value\n";
  if (draws.chains.empty() || draws.chains[0].empty()) return;
  const auto& first = draws.chains[0][0];
  const auto names = state_scalar_names(first.n_seasons(), first.weeks(), draws.seasons);
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    for (std::size_t k = 0; k < draws.chains[c].size(); ++k) {
      const Eigen::VectorXd flat = flatten_state(draws.chains[c][k]);
      for (Eigen::Index s = 0; s < flat.size(); ++s) {
        out << c + 1 << ',' << k + 1 << ',' << names[static_cast<std::size_t>(s)] << ','
            << format_double(flat(s)) << '\n';
      }
    }
  }
}

void write_convergence_report(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_convergence_report: cannot open " + path);
  out << "seed = " << draws.seed << '\n';
  out << "n_chains = " << draws.chains.size() << '\n';
  out << "draws_per_chain = " << (draws.chains.empty() ? 0 : draws.chains[0].size()) << '\n';
  for (const auto& a : draws.acceptance) {
    out << "acceptance." << a.block << " = " << format_double(a.rate()) << '\n';
  }
  out << "rhat_computed = " << (draws.convergence.computed ? "true" : "false") << '\n';
  if (draws.convergence.computed) {
    out << "max_rhat = " << format_double(draws.convergence.max_rhat) << '\n';
    for (std::size_t s = 0; s < draws.convergence.names.size(); ++s) {
      out << "rhat." << draws.convergence.names[s] << " = "
          << format_double(draws.convergence.rhat(static_cast<Eigen::Index>(s)))
          << (draws.convergence.degenerate[s] ? " # degenerate" : "") << '\n';
    }
    for (const auto& w : draws.convergence.warnings) out << "warning = " << w << '\n';
  }
}

}  // namespace dbflu
