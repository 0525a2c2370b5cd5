#include "mev/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace mev {

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, const SimplexOptions& options) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const Eigen::Index dim = start.size();
  const Eigen::Index vertices = dim + 1;
  Eigen::MatrixXd simplex(dim, vertices);
  Eigen::VectorXd values(vertices);

  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = objective(x);
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  };

  simplex.col(0) = start;
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::VectorXd v = start;
    const double step = start(i) != 0 ? options.initial_step * std::abs(start(i)) : options.initial_step;
    v(i) += step;
    simplex.col(i + 1) = v;
  }
  for (Eigen::Index j = 0; j < vertices; ++j) values(j) = eval(simplex.col(j));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(vertices));
  SimplexResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
    const Eigen::Index best = order.front();
    const Eigen::Index worst = order.back();
    const Eigen::Index second = order[order.size() - 2];

    const double spread = std::abs(values(worst) - values(best));
    if (std::isfinite(values(worst)) &&
        spread <= options.relative_tolerance * (std::abs(values(best)) + std::abs(values(worst))) * 0.5 + 1e-300) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = (simplex.rowwise().sum() - simplex.col(worst)) / static_cast<double>(dim);
    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - simplex.col(worst));
    const double f_reflected = eval(reflected);

    if (f_reflected < values(best)) {
      const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex.col(worst) = expanded;
        values(worst) = f_expanded;
      } else {
        simplex.col(worst) = reflected;
        values(worst) = f_reflected;
      }
      continue;
    }
    if (f_reflected < values(second)) {
      simplex.col(worst) = reflected;
      values(worst) = f_reflected;
      continue;
    }

    // contraction, outside or inside
    const bool outside = f_reflected < values(worst);
    const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + kContract * (reflected - centroid))
                                               : Eigen::VectorXd(centroid + kContract * (simplex.col(worst) - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values(worst))) {
      simplex.col(worst) = contracted;
      values(worst) = f_contracted;
      continue;
    }

    for (Eigen::Index j = 0; j < vertices; ++j) {
      if (j == best) continue;
      simplex.col(j) = simplex.col(best) + kShrink * (simplex.col(j) - simplex.col(best));
      values(j) = eval(simplex.col(j));
    }
  }

  Eigen::Index best = 0;
  values.minCoeff(&best);
  result.argmin = simplex.col(best);
  result.minimum = values(best);
  result.iterations = iter;
  if (!std::isfinite(result.minimum)) result.converged = false;
  return result;
}

}  // namespace mev
