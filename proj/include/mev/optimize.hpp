#pragma once

#include <functional>

#include <Eigen/Core>

namespace mev {

struct SimplexOptions {
  int max_iterations = 2000;
  double relative_tolerance = 1e-10;  // on the objective spread across the simplex
  double initial_step = 0.1;          // per-coordinate offset of the starting simplex
};

struct SimplexResult {
  Eigen::VectorXd argmin;
  double minimum = 0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead downhill simplex. The objective may return +inf to mark
/// infeasible points; those are never accepted as improvements.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, const SimplexOptions& options = {});

}  // namespace mev
