#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/rng.hpp"
#include "dbflu/sir.hpp"

namespace dbflu {

// Least-squares SIR fit for one historical season, s0 pinned at 0.9.
struct SeasonSirFit {
  int season;
  SirParams params;
  double sse;
};

struct SirFitOptions {
  double s0 = 0.9;
  double beta_max = 5.0;  // optimizer-only cap; keeps the weekly RK4 stable
  int min_observed_weeks = 10;
};

// Truncation intervals of the empirical prior on (i0, beta, rho).
inline constexpr double kPriorI0Max = 0.1;
inline constexpr double kPriorRhoMax = 0.9;

// Multivariate Gaussian over untransformed (i0, beta, rho), truncated to
// i0 in (0, 0.1), beta in (0, inf), rho in (0, 0.9). Sampling is by
// rejection, so the stored mean/cov are those of the untruncated fit.
struct TruncatedMvnPrior {
  Eigen::Vector3d mean;
  Eigen::Matrix3d cov;

  bool in_bounds(double i0, double beta, double rho) const;
  // Log density up to the truncation constant; -inf outside the bounds.
  double log_density(double i0, double beta, double rho) const;

  // Cached factorizations (built on first use).
  const Eigen::Matrix3d& chol_lower() const;
  const Eigen::Matrix3d& precision() const;

 private:
  mutable bool cached_ = false;
  mutable Eigen::Matrix3d chol_;
  mutable Eigen::Matrix3d prec_;
  void build_cache() const;
};

struct OptimizationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RejectionExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fits (i0, beta, rho) by least squares between the weekly infectious
// trajectory and observed wILI (NaN marks gaps). Deterministic: ten fixed
// multistarts, best SSE wins, SSE ties broken by smaller beta.
SeasonSirFit fit_sir_to_season(int season, const Eigen::VectorXd& wili, const SirFitOptions& opts = {});

// Sample mean/covariance of the fitted triples, excluding one season.
TruncatedMvnPrior fit_prior(const std::vector<SeasonSirFit>& fits, int exclude_season);

// One rejection-sampled (i0, beta, rho) triple inside the bounds.
std::array<double, 3> sample_prior(const TruncatedMvnPrior& prior, Rng& rng);

// Assemble SirParams from a prior draw (s0 = 0.9, r0 derived).
SirParams params_from_draw(const std::array<double, 3>& draw, double s0 = 0.9);

// Audit files: one row per season (season, i0, beta, rho, sse); prior as a
// key-value text file.
void write_fits(const std::vector<SeasonSirFit>& fits, const std::string& path);
std::vector<SeasonSirFit> read_fits(const std::string& path);
void write_prior(const TruncatedMvnPrior& prior, const std::string& path);
TruncatedMvnPrior read_prior(const std::string& path);

}  // namespace dbflu
