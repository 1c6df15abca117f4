#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace dbflu {

// Deterministic random stream. All variate algorithms are implemented here
// rather than taken from <random> distributions so that a given seed yields
// the same stream on every platform, which the resume and replay contracts
// rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on (0,1), endpoints excluded.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; one cached deviate.
  double normal();
  double normal(double mean, double sd);

  // Gamma(shape, rate) via Marsaglia-Tsang.
  double gamma(double shape, double rate);

  // Beta(a, b) as a ratio of gammas.
  double beta(double a, double b);

  std::uint64_t integer() { return gen_(); }

  // SplitMix64 step, used to derive per-cell / per-chain seeds.
  static std::uint64_t mix(std::uint64_t x);
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Draw from N(mean, cov) using the lower Cholesky factor of cov.
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower, Rng& rng);

}  // namespace dbflu
