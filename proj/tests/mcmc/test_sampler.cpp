#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dbflu/math.hpp"
#include "dbflu/mcmc.hpp"
#include "dbflu/rng.hpp"

using namespace dbflu;

namespace {

TruncatedMvnPrior test_prior() {
  TruncatedMvnPrior prior;
  prior.mean << 0.004, 1.0, 0.7;
  prior.cov << 4e-6, 0.0, 0.0, 0.0, 0.04, 0.004, 0.0, 0.004, 0.0064;
  return prior;
}

SeasonPanel empty_panel(int n_seasons, int weeks) {
  SeasonPanel panel;
  for (int j = 0; j < n_seasons; ++j) panel.seasons.push_back(2000 + j);
  panel.values = Eigen::MatrixXd::Constant(n_seasons, weeks, std::numeric_limits<double>::quiet_NaN());
  return panel;
}

// Panel simulated from the generative model itself.
SeasonPanel model_panel(int n_seasons, int weeks, std::uint64_t seed, const TruncatedMvnPrior& prior,
                        double lambda) {
  Rng rng(seed);
  ModelState state(n_seasons, weeks);
  Eigen::VectorXd mu(weeks);
  double v = rng.normal(0.0, 0.5);
  mu(weeks - 1) = v;
  for (int t = weeks - 2; t >= 0; --t) {
    v = rng.normal(v, 0.1);
    mu(t) = v;
  }
  for (int t = 0; t < weeks; ++t) state.set_mu(t, mu(t));
  for (int j = 0; j < n_seasons; ++j) {
    const auto draw = sample_prior(prior, rng);
    state.set_sir(j, draw[0], draw[1], draw[2]);
    const double alpha = 0.9;
    const double sd_delta = 0.1;
    Eigen::VectorXd delta(weeks);
    delta(weeks - 1) = -logit(state.infectious(j)(weeks - 1));
    for (int t = weeks - 2; t >= 0; --t) delta(t) = rng.normal(alpha * delta(t + 1), sd_delta);
    for (int t = 0; t + 1 < weeks; ++t) state.set_delta(j, t, delta(t));
  }
  SeasonPanel panel = empty_panel(n_seasons, weeks);
  for (int j = 0; j < n_seasons; ++j) {
    for (int t = 0; t < weeks; ++t) {
      const double pi = state.pi(j, t);
      panel.values(j, t) = rng.beta(lambda * pi, lambda * (1.0 - pi));
    }
  }
  return panel;
}

}  // namespace

TEST_CASE("fixed seed gives a bit-identical chain") {
  const TruncatedMvnPrior prior = test_prior();
  const DataModelConfig dmc;
  const HyperConfig hc;
  const SeasonPanel panel = model_panel(2, 35, 77, prior, dmc.lambda);
  SamplerConfig config;
  config.n_chains = 1;
  config.n_iter = 2000;
  config.thin = 4;
  config.seed = 4242;

  const auto a = run_chain(panel, prior, dmc, hc, config, 0);
  const auto b = run_chain(panel, prior, dmc, hc, config, 0);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == static_cast<std::size_t>(config.draws_per_chain()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK((flatten_state(a[k]) - flatten_state(b[k])).cwiseAbs().maxCoeff() == 0.0);
  }
  // A different chain id moves the stream.
  const auto c = run_chain(panel, prior, dmc, hc, config, 1);
  CHECK((flatten_state(a.back()) - flatten_state(c.back())).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("stored draws satisfy the structural invariants with finite density") {
  const TruncatedMvnPrior prior = test_prior();
  const DataModelConfig dmc;
  const HyperConfig hc;
  const SeasonPanel panel = model_panel(3, 35, 99, prior, dmc.lambda);
  SamplerConfig config;
  config.n_chains = 1;
  config.n_iter = 1500;
  config.thin = 3;
  config.seed = 11;

  const auto chain = run_chain(panel, prior, dmc, hc, config, 0);
  for (const auto& draw : chain) {
    CHECK(std::isfinite(log_joint(draw, panel, prior, dmc, hc)));
    for (int j = 0; j < draw.n_seasons(); ++j) {
      CHECK(draw.delta(j, 34) == -logit(draw.infectious(j)(34)));
      CHECK(draw.logit_pi(j, 34) == draw.mu(34));
      CHECK(draw.i0(j) > 0.0);
      CHECK(draw.i0(j) < 0.1);
      CHECK(draw.rho(j) < 0.9);
      CHECK(draw.alpha(j) > 0.02);
      CHECK(draw.alpha(j) < 0.98);
    }
  }
}

TEST_CASE("sampler config arithmetic replicates the fitting protocols") {
  const SamplerConfig diag = SamplerConfig::diagnostic();
  CHECK(diag.n_chains == 4);
  CHECK(diag.n_iter == 100000);
  CHECK(diag.thin == 20);
  CHECK(diag.draws_per_chain() == 2500);
  const SamplerConfig prod = SamplerConfig::production();
  CHECK(prod.n_chains == 1);
  CHECK(prod.n_iter == 50000);
  CHECK(prod.draws_per_chain() == 2500);
  const SamplerConfig ci = SamplerConfig::ci();
  CHECK(ci.n_chains == 1);
  CHECK(ci.n_iter == 10000);
  CHECK(ci.draws_per_chain() == 2500);
}

TEST_CASE("prior-only run reproduces the prior") {
  const TruncatedMvnPrior prior = test_prior();
  const DataModelConfig dmc;
  const HyperConfig hc;
  const SeasonPanel panel = empty_panel(1, 35);
  SamplerConfig config;
  config.n_chains = 1;
  config.n_iter = 30000;
  config.thin = 6;
  config.seed = 314159;

  const auto chain = run_chain(panel, prior, dmc, hc, config, 0);
  const int n = static_cast<int>(chain.size());
  Eigen::VectorXd i0(n), beta(n), rho(n), alpha(n);
  for (int k = 0; k < n; ++k) {
    i0(k) = chain[static_cast<std::size_t>(k)].i0(0);
    beta(k) = chain[static_cast<std::size_t>(k)].beta(0);
    rho(k) = chain[static_cast<std::size_t>(k)].rho(0);
    alpha(k) = chain[static_cast<std::size_t>(k)].alpha(0);
  }

  // Direct draws as the reference.
  Rng rng(2718);
  const int m = 40000;
  Eigen::VectorXd ref_i0(m), ref_beta(m), ref_rho(m);
  for (int k = 0; k < m; ++k) {
    const auto draw = sample_prior(prior, rng);
    ref_i0(k) = draw[0];
    ref_beta(k) = draw[1];
    ref_rho(k) = draw[2];
  }

  auto close_means = [&](const Eigen::VectorXd& mcmc, const Eigen::VectorXd& ref) {
    const double se_mcmc = sd(mcmc) / std::sqrt(effective_sample_size(mcmc));
    const double se_ref = sd(ref) / std::sqrt(static_cast<double>(m));
    const double se = std::sqrt(se_mcmc * se_mcmc + se_ref * se_ref);
    CHECK(std::abs(mean(mcmc) - mean(ref)) < 3.0 * se);
  };
  close_means(i0, ref_i0);
  close_means(beta, ref_beta);
  close_means(rho, ref_rho);

  // Quartiles within 3 combined standard errors (quantile SE via the
  // order-statistic spacing estimate).
  auto close_quartiles = [&](const Eigen::VectorXd& mcmc, const Eigen::VectorXd& ref) {
    for (double p : {0.25, 0.5, 0.75}) {
      const double spacing = (quantile(ref, p + 0.05) - quantile(ref, p - 0.05)) / 0.1;
      const double se_mcmc = spacing * std::sqrt(p * (1 - p) / effective_sample_size(mcmc));
      const double se_ref = spacing * std::sqrt(p * (1 - p) / m);
      const double se = std::sqrt(se_mcmc * se_mcmc + se_ref * se_ref);
      CHECK(std::abs(quantile(mcmc, p) - quantile(ref, p)) < 3.0 * se);
    }
  };
  close_quartiles(i0, ref_i0);
  close_quartiles(beta, ref_beta);
  close_quartiles(rho, ref_rho);

  // alpha marginal: logit(alpha) ~ TN(logit .9, sigma_alpha^2) mixed over
  // sigma_alpha ~ Gamma(2,2).
  Eigen::VectorXd ref_alpha(m);
  const double lo = logit(0.02), hi = logit(0.98);
  for (int k = 0; k < m; ++k) {
    const double s = rng.gamma(2.0, 2.0);
    double x;
    do {
      x = rng.normal(logit(0.9), s);
    } while (x < lo || x > hi);
    ref_alpha(k) = inv_logit(x);
  }
  close_means(alpha, ref_alpha);

  // mu increment sd: marginally sqrt(E[1/tau_mu]) = sqrt(rate/(shape-1)).
  Eigen::VectorXd incs(n * 34);
  int idx = 0;
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t + 1 < 35; ++t) incs(idx++) = chain[static_cast<std::size_t>(k)].mu(t) - chain[static_cast<std::size_t>(k)].mu(t + 1);
  }
  const double expect_sd = std::sqrt(hc.tau_mu_rate / (hc.tau_mu_shape - 1.0));
  CHECK(sd(incs) == doctest::Approx(expect_sd).epsilon(0.10));
}

TEST_CASE("posterior concentrates mu_T at the logit of terminal observations") {
  const TruncatedMvnPrior prior = test_prior();
  const DataModelConfig dmc;
  const HyperConfig hc;
  const SeasonPanel panel = model_panel(4, 35, 1001, prior, dmc.lambda);
  SamplerConfig config;
  config.n_chains = 2;
  config.n_iter = 6000;
  config.thin = 4;
  config.seed = 555;

  const PosteriorDraws draws = sample_posterior(panel, prior, dmc, hc, config);
  REQUIRE(draws.chains.size() == 2);
  CHECK(draws.convergence.computed);
  CHECK(draws.convergence.rhat.size() == static_cast<Eigen::Index>(draws.convergence.names.size()));

  double data_mean = 0.0;
  for (int j = 0; j < 4; ++j) data_mean += logit(panel.value(j, 35));
  data_mean /= 4.0;
  Eigen::VectorXd mu_T(draws.n_total());
  for (int k = 0; k < draws.n_total(); ++k) mu_T(k) = draws.draw(k).mu(34);
  CHECK(std::abs(mean(mu_T) - data_mean) < 0.2);

  // Acceptance summaries exist for every block type.
  CHECK(draws.acceptance.size() == 16);
  for (const auto& a : draws.acceptance) {
    if (a.block != "delta_bridge") CHECK(a.proposed > 0);  // fully observed panels have no bridge runs
  }
}

TEST_CASE("draw and convergence archives round trip structurally") {
  namespace fs = std::filesystem;
  const TruncatedMvnPrior prior = test_prior();
  const DataModelConfig dmc;
  const HyperConfig hc;
  const SeasonPanel panel = model_panel(2, 35, 2020, prior, dmc.lambda);
  SamplerConfig config;
  config.n_chains = 2;
  config.n_iter = 600;
  config.thin = 10;
  config.seed = 8;
  const PosteriorDraws draws = sample_posterior(panel, prior, dmc, hc, config);
  CHECK(draws.n_total() == 2 * config.draws_per_chain());

  const fs::path dir = fs::temp_directory_path() / "dbflu_mcmc_tests";
  fs::create_directories(dir);
  write_draws(draws, (dir / "draws.csv").string());
  write_convergence_report(draws, (dir / "report.txt").string());

  std::ifstream in(dir / "draws.csv");
  std::string line;
  long rows = 0;
  while (std::getline(in, line)) ++rows;
  const long scalars = static_cast<long>(flatten_state(draws.draw(0)).size());
  CHECK(rows == 1 + static_cast<long>(draws.n_total()) * scalars);

  std::ifstream rep(dir / "report.txt");
  bool has_rhat = false;
  while (std::getline(rep, line)) {
    if (line.rfind("max_rhat", 0) == 0) has_rhat = true;
  }
  CHECK(has_rhat);
}
