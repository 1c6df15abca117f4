#include "dbflu/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dbflu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;
}  // namespace

double logit(double p) { return std::log(p) - std::log1p(-p); }

double inv_logit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_lpdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) return -kInf;
  const double z = (x - mean) / sd;
  return -0.5 * (kLogTwoPi + z * z) - std::log(sd);
}

double gamma_lpdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::domain_error("gamma_lpdf: shape and rate must be positive");
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double beta_lpdf(double y, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return -kInf;
  if (!(y > 0.0) || !(y < 1.0)) return -kInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(y) +
         (b - 1.0) * std::log1p(-y);
}

double truncnorm_lpdf(double x, double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0) || !(lo < hi)) return -kInf;
  if (x < lo || x > hi) return -kInf;
  const double z = norm_cdf((hi - mean) / sd) - norm_cdf((lo - mean) / sd);
  if (!(z > 0.0)) return -kInf;
  return normal_lpdf(x, mean, sd) - std::log(z);
}

double mean(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw std::invalid_argument("mean: empty vector");
  return x.mean();
}

double sd(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 2) throw std::invalid_argument("sd: need at least two values");
  const double m = x.mean();
  return std::sqrt((x.array() - m).square().sum() / static_cast<double>(n - 1));
}

double quantile(const Eigen::VectorXd& x, double p) {
  const auto n = x.size();
  if (n == 0) throw std::invalid_argument("quantile: empty vector");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0,1]");
  std::vector<double> v(x.data(), x.data() + n);
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * v[static_cast<std::size_t>(lo)] + w * v[static_cast<std::size_t>(hi)];
}

double effective_sample_size(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double m = x.mean();
  Eigen::VectorXd c = x.array() - m;
  const double var0 = c.squaredNorm() / static_cast<double>(n);
  if (!(var0 > 0.0)) return static_cast<double>(n);

  // Sum autocovariances in lag pairs while the pair sums stay positive.
  double acc = 0.0;
  for (Eigen::Index lag = 1; lag + 1 < n; lag += 2) {
    const double g1 = c.head(n - lag).dot(c.tail(n - lag)) / static_cast<double>(n);
    const double g2 = c.head(n - lag - 1).dot(c.tail(n - lag - 1)) / static_cast<double>(n);
    const double pair = g1 + g2;
    if (pair <= 0.0) break;
    acc += pair;
  }
  const double ess = static_cast<double>(n) / (1.0 + 2.0 * acc / var0);
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

}  // namespace dbflu
