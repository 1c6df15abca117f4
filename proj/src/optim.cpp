#include "dbflu/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dbflu {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(start.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<Eigen::VectorXd> pts(n + 1, start);
  for (int i = 0; i < n; ++i) pts[i + 1](i) += opts.initial_step;
  std::vector<double> fv(n + 1);
  for (int i = 0; i <= n; ++i) fv[i] = objective(pts[i]);

  std::vector<int> order(n + 1);
  NelderMeadResult res;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[n], second_worst = order[n - 1];

    if (std::isfinite(fv[best]) && std::isfinite(fv[worst])) {
      double spread = 0.0;
      for (int i = 1; i <= n; ++i) spread = std::max(spread, (pts[order[i]] - pts[best]).norm());
      if (std::abs(fv[worst] - fv[best]) <= opts.f_tolerance && spread <= opts.x_tolerance) {
        res.converged = true;
        break;
      }
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + alpha * (centroid - pts[worst]);
    const double f_ref = objective(reflected);
    if (f_ref < fv[best]) {
      const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
      const double f_exp = objective(expanded);
      if (f_exp < f_ref) {
        pts[worst] = expanded;
        fv[worst] = f_exp;
      } else {
        pts[worst] = reflected;
        fv[worst] = f_ref;
      }
      continue;
    }
    if (f_ref < fv[second_worst]) {
      pts[worst] = reflected;
      fv[worst] = f_ref;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + rho * (pts[worst] - centroid);
    const double f_con = objective(contracted);
    if (f_con < fv[worst]) {
      pts[worst] = contracted;
      fv[worst] = f_con;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + sigma * (pts[i] - pts[best]);
      fv[i] = objective(pts[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = pts[best];
  res.value = fv[best];
  return res;
}

}  // namespace dbflu
