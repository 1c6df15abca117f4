#pragma once

#include <Eigen/Dense>

// Scalar density and summary helpers shared across the library.
// Conventions: all Gamma distributions are shape-rate; logit/inv_logit are
// the natural-log odds transforms; week vectors are 0-based with index 0
// holding season-week 1.

namespace dbflu {

double logit(double p);
double inv_logit(double x);

// Standard normal CDF.
double norm_cdf(double z);

double normal_lpdf(double x, double mean, double sd);
double gamma_lpdf(double x, double shape, double rate);
double beta_lpdf(double y, double a, double b);

// Log density of a Normal(mean, sd^2) truncated to [lo, hi].
double truncnorm_lpdf(double x, double mean, double sd, double lo, double hi);

double mean(const Eigen::VectorXd& x);
double sd(const Eigen::VectorXd& x);

// Empirical quantile with linear interpolation between order statistics
// (R type-7). p in [0,1].
double quantile(const Eigen::VectorXd& x, double p);

// Effective sample size via Geyer's initial positive sequence.
double effective_sample_size(const Eigen::VectorXd& x);

}  // namespace dbflu
