#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/model.hpp"
#include "dbflu/panel.hpp"
#include "dbflu/priors.hpp"

namespace dbflu {

struct SamplerConfig {
  int n_chains = 4;
  int n_iter = 100000;
  double burn_in_fraction = 0.5;
  int thin = 20;
  std::uint64_t seed = 20160523;
  int adapt_batch = 50;       // proposals per step-size adaptation batch
  int mu_shift_period = 10;   // whole-vector mu proposal every k-th iteration
  int max_init_attempts = 100;

  int burn_in_iters() const { return static_cast<int>(static_cast<double>(n_iter) * burn_in_fraction); }
  int draws_per_chain() const { return (n_iter - burn_in_iters()) / thin; }

  // Paper protocols: four diagnostic chains of 100k thinned by 20, one
  // production chain of 50k thinned by 10 (both half burn-in, 2500 kept per
  // chain); `ci` is the reduced config for fast runs.
  static SamplerConfig diagnostic();
  static SamplerConfig production();
  static SamplerConfig ci();
};

struct BlockAcceptance {
  std::string block;
  long accepted = 0;
  long proposed = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct ConvergenceReport {
  bool computed = false;  // requires >= 2 chains
  std::vector<std::string> names;
  Eigen::VectorXd rhat;
  std::vector<bool> degenerate;
  double max_rhat = 0.0;
  std::vector<std::string> warnings;
};

struct InitializationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thinned post-burn-in chains plus bookkeeping.
struct PosteriorDraws {
  std::vector<std::vector<ModelState>> chains;
  std::vector<int> seasons;  // panel season ids, for labeling
  std::vector<BlockAcceptance> acceptance;
  std::uint64_t seed = 0;
  ConvergenceReport convergence;

  int n_total() const;
  const ModelState& draw(int k) const;  // merged index across chains
};

// One Metropolis-within-Gibbs chain targeting exp(log_joint). Deterministic
// given (config.seed, chain_id). Blocks, in fixed order: per-season SIR
// triple (joint walk on transformed scale), mu single-site plus an occasional
// full shift, delta single-site, alpha_j, scale parameters on the log scale,
// then a_delta and b_delta.
std::vector<ModelState> run_chain(const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                                  const DataModelConfig& dmc, const HyperConfig& hc,
                                  const SamplerConfig& config, int chain_id,
                                  std::vector<BlockAcceptance>* acceptance = nullptr);

// Potential scale reduction factor over equal-length chains of one scalar.
// Zero between- or within-chain variance is reported as 1.0 with the flag set.
double gelman_rubin(const std::vector<Eigen::VectorXd>& chains, bool* degenerate = nullptr);

// All chains (run concurrently), merged post burn-in and thinning, with
// R-hat computed for every scalar when n_chains >= 2. R-hat >= 1.1 adds a
// warning but does not fail.
PosteriorDraws sample_posterior(const SeasonPanel& panel, const TruncatedMvnPrior& prior,
                                const DataModelConfig& dmc, const HyperConfig& hc, const SamplerConfig& config);

// Columnar draw archive: chain, iteration, scalar, value.
void write_draws(const PosteriorDraws& draws, const std::string& path);
void write_convergence_report(const PosteriorDraws& draws, const std::string& path);

// Local (unnormalized) log-conditionals of each sampler block, in natural
// coordinates. The sampler's acceptance ratios are differences of these, so
// they double as the seams for the detailed-balance and closed-form
// conditional tests.
namespace blocks {
double sir_triple(const ModelState& s, const SeasonPanel& p, const TruncatedMvnPrior& prior,
                  const DataModelConfig& dmc, int j);
double mu_site(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int t);
double mu_shift(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc);
double delta_site(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int j, int t);
double week_translation(const ModelState& s, int t);
double mu_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, const HyperConfig& hc);
double delta_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, int j);
double alpha_scale_target(const ModelState& s, const SeasonPanel& p, const DataModelConfig& dmc, const HyperConfig& hc);
double alpha_site(const ModelState& s, const HyperConfig& hc, int j);
double tau_mu_T_cond(const ModelState& s, const HyperConfig& hc);
double tau_mu_cond(const ModelState& s, const HyperConfig& hc);
double tau_delta_cond(const ModelState& s, const HyperConfig& hc, int j);
double sigma_alpha_cond(const ModelState& s, const HyperConfig& hc);
double a_delta_cond(const ModelState& s, const HyperConfig& hc);
double b_delta_cond(const ModelState& s, const HyperConfig& hc);
}  // namespace blocks

}  // namespace dbflu
