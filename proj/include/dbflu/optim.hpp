#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dbflu {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-10;
  double initial_step = 0.25;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Deterministic downhill simplex (Nelder-Mead) minimizer. The objective may
// return +inf to mark infeasible points.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& opts = {});

}  // namespace dbflu
