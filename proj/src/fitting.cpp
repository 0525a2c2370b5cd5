#include "mev/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "mev/errors.hpp"
#include "mev/optimize.hpp"

namespace mev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286;

struct Standardized {
  Eigen::ArrayXd x;
  double center = 0;
  double spread = 1;
};

Standardized standardize(std::span<const double> data) {
  Standardized s;
  const Eigen::Map<const Eigen::ArrayXd> raw(data.data(), static_cast<Eigen::Index>(data.size()));
  s.center = raw.mean();
  const double var = (raw - s.center).square().sum() / static_cast<double>(data.size() - 1);
  s.spread = std::sqrt(var);
  if (!(s.spread > 0) || !std::isfinite(s.spread))
    throw NonConvergence("maxima have zero spread; likelihood is degenerate");
  s.x = (raw - s.center) / s.spread;
  return s;
}

// Negative GEV log-likelihood; theta = (mu, log sigma, k).
double gev_nll(const Eigen::ArrayXd& x, double mu, double sigma, double k) {
  if (!(sigma > 0) || !std::isfinite(sigma) || !std::isfinite(mu) || !std::isfinite(k)) return kInf;
  const Eigen::ArrayXd z = (x - mu) / sigma;
  const double n = static_cast<double>(x.size());
  if (std::abs(k) < kGumbelSwitch) return n * std::log(sigma) + z.sum() + (-z).exp().sum();
  // density unbounded at the upper endpoint for k <= -1
  if (k <= -1) return kInf;
  const Eigen::ArrayXd t = 1 + k * z;
  if ((t <= 0).any()) return kInf;
  const Eigen::ArrayXd log_t = (k * z).log1p();
  return n * std::log(sigma) + (1 + 1 / k) * log_t.sum() + (-log_t / k).exp().sum();
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw NonConvergence(what);
  return v;
}

}  // namespace

std::string to_string(FitMethod m) {
  switch (m) {
    case FitMethod::LeastSquares: return "ls";
    case FitMethod::MaximumLikelihood: return "mle";
    case FitMethod::GumbelMaximumLikelihood: return "gumbel_mle";
  }
  return "unknown";
}

FitMethod fit_method_from_string(const std::string& s) {
  if (s == "ls" || s == "LS") return FitMethod::LeastSquares;
  if (s == "mle" || s == "MLE") return FitMethod::MaximumLikelihood;
  if (s == "gumbel_mle" || s == "GUMBEL_MLE") return FitMethod::GumbelMaximumLikelihood;
  throw ValidationError("unknown fit method '" + s + "'");
}

FitReport fit_weibull_ls(std::span<const ExceedancePoint> points, double h0) {
  if (points.size() < 3)
    throw InsufficientData("fit_weibull_ls: " + std::to_string(points.size()) + " points, need at least 3");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (!(p.h >= h0) || !(p.h > 0)) throw DomainError("fit_weibull_ls: every h must be positive and at least h0");
    if (!(p.psi > 0 && p.psi < 1)) throw DomainError("fit_weibull_ls: psi must lie in (0, 1)");
    design(i, 0) = std::log(p.h);
    design(i, 1) = 1.0;
    response(i) = std::log(-std::log(p.psi));
  }
  const double spread = design.col(0).maxCoeff() - design.col(0).minCoeff();
  if (!(spread > 0)) throw DegenerateFit("fit_weibull_ls: all h are equal");

  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(response);
  const double shape = coef(0);
  if (!(shape > 0) || !std::isfinite(shape))
    throw DegenerateFit("fit_weibull_ls: non-positive slope, data are not a decaying tail");

  FitReport r{WeibullTail<double>(std::exp(-coef(1) / shape), shape, h0), FitMethod::LeastSquares};
  r.n_points = points.size();
  r.objective = (design * coef - response).squaredNorm();
  r.converged = std::isfinite(r.objective);
  return r;
}

double weibull_truncated_loglik(std::span<const double> values, const WeibullTail<double>& tail) {
  double ll = 0;
  for (double h : values) {
    if (h <= tail.threshold) continue;
    const double x = h / tail.scale;
    const double x0 = tail.threshold / tail.scale;
    ll += std::log(tail.shape / tail.scale) + (tail.shape - 1) * std::log(x) -
          (std::pow(x, tail.shape) - std::pow(x0, tail.shape));
  }
  return ll;
}

FitReport fit_weibull_mle(std::span<const double> values, double h0, const MleOptions& options) {
  std::vector<double> kept;
  std::copy_if(values.begin(), values.end(), std::back_inserter(kept), [h0](double v) { return v > h0; });
  if (kept.size() < 5)
    throw InsufficientData("fit_weibull_mle: " + std::to_string(kept.size()) + " values above h0, need at least 5");

  const double n = static_cast<double>(kept.size());
  const double top = *std::max_element(kept.begin(), kept.end());
  const double log_top = std::log(top);
  double sum_log = 0;
  for (double h : kept) sum_log += std::log(h);

  // Scale profiled out: for fixed w, C^w = sum(h^w - h0^w) / n. Powers are
  // taken relative to the largest value to stay finite at large w.
  auto scaled_excess = [&](double w) {
    double s = 0;
    const double base0 = std::pow(h0 / top, w);
    for (double h : kept) s += std::pow(h / top, w) - base0;
    return s / n;
  };
  auto profile_nll = [&](double log_w) {
    const double w = std::exp(log_w);
    const double m = scaled_excess(w);
    if (!(m > 0)) return kInf;
    const double log_cw = w * log_top + std::log(m);
    return -(n * std::log(w) - n * log_cw + (w - 1) * sum_log - n);
  };

  FitReport r{WeibullTail<double>(1.0, 1.0, h0), FitMethod::MaximumLikelihood};
  r.n_points = kept.size();

  double w = 0;
  if (options.fixed_shape) {
    w = *options.fixed_shape;
    if (!(w > 0)) throw DomainError("fit_weibull_mle: fixed shape must be > 0");
    r.converged = true;
  } else {
    const double lo = std::log(options.min_shape);
    const double hi = std::log(options.max_shape);
    std::uintmax_t iters = 200;
    const auto [arg, val] = boost::math::tools::brent_find_minima(profile_nll, lo, hi, 52, iters);
    w = std::exp(arg);
    r.iterations = static_cast<int>(iters);
    const double edge = 1e-4 * (hi - lo);
    if (arg - lo < edge || hi - arg < edge) {
      r.diagnostics = "likelihood maximum not interior: shape ran to the search bound " + std::to_string(w);
    } else if (!std::isfinite(val)) {
      r.diagnostics = "non-finite likelihood at the optimum";
    } else if (iters >= 200) {
      r.diagnostics = "iteration limit reached";
    } else {
      r.converged = true;
    }
  }

  const double m = scaled_excess(w);
  if (!(m > 0)) {
    r.converged = false;
    r.objective = kInf;
    r.diagnostics = "degenerate data: no excess over the threshold";
    return r;
  }
  const double scale = std::exp((w * log_top + std::log(m)) / w);
  r.params = WeibullTail<double>(scale, w, h0);
  r.objective = -weibull_truncated_loglik(kept, r.tail());
  if (!std::isfinite(r.objective)) r.converged = false;
  return r;
}

double gev_loglik(std::span<const double> maxima, const GevParams<double>& params) {
  const Eigen::Map<const Eigen::ArrayXd> x(maxima.data(), static_cast<Eigen::Index>(maxima.size()));
  return -gev_nll(x, params.location, params.scale, params.shape);
}

FitReport fit_gev(std::span<const double> maxima) {
  if (maxima.size() < 10)
    throw InsufficientData("fit_gev: " + std::to_string(maxima.size()) + " maxima, need at least 10");
  const Standardized s = standardize(maxima);

  const double sigma0 = std::sqrt(6.0) / std::numbers::pi;
  const Eigen::Vector3d start(-kEulerGamma * sigma0, std::log(sigma0), 0.0);
  auto objective = [&](const Eigen::VectorXd& th) { return gev_nll(s.x, th(0), std::exp(th(1)), th(2)); };

  SimplexOptions opts;
  opts.initial_step = 0.1;
  SimplexResult res = nelder_mead(objective, start, opts);
  int used = res.iterations;
  // restart from the optimum to recover from premature simplex collapse
  if (res.converged && used < opts.max_iterations) {
    SimplexOptions again = opts;
    again.max_iterations = opts.max_iterations - used;
    const SimplexResult polished = nelder_mead(objective, res.argmin, again);
    used += polished.iterations;
    if (polished.minimum <= res.minimum) res = polished;
    res.converged = polished.converged;
  }
  if (!res.converged)
    throw NonConvergence("fit_gev: simplex did not converge within " + std::to_string(opts.max_iterations) +
                         " iterations");

  const GevParams<double> p(s.center + s.spread * res.argmin(0), s.spread * std::exp(res.argmin(1)), res.argmin(2));
  FitReport r{p, FitMethod::MaximumLikelihood};
  r.n_points = maxima.size();
  r.iterations = used;
  r.objective = finite_or_throw(-gev_loglik(maxima, p), "fit_gev: maxima outside the fitted support");
  r.converged = true;
  return r;
}

FitReport fit_gumbel(std::span<const double> maxima) {
  if (maxima.size() < 5)
    throw InsufficientData("fit_gumbel: " + std::to_string(maxima.size()) + " maxima, need at least 5");
  const Standardized s = standardize(maxima);
  const Eigen::ArrayXd& x = s.x;
  const double mean = x.mean();
  const double xmin = x.minCoeff();

  // Profile score in sigma: sigma - mean + sum(x e^{-x/sigma}) / sum(e^{-x/sigma}) = 0
  auto weighted_mean = [&](double sigma) {
    const Eigen::ArrayXd e = (-(x - xmin) / sigma).exp();
    return (x * e).sum() / e.sum();
  };
  auto score = [&](double sigma) { return sigma - mean + weighted_mean(sigma); };

  double lo = 1e-3;
  double hi = 10.0;
  while (score(lo) > 0 && lo > 1e-12) lo *= 0.1;
  while (score(hi) < 0 && hi < 1e6) hi *= 10;
  if (score(lo) > 0 || score(hi) < 0) throw NonConvergence("fit_gumbel: could not bracket the scale equation");

  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(score, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                        iters);
  const double sigma = 0.5 * (a + b);
  // mu = -sigma ln(mean(exp(-x/sigma))), via log-sum-exp around the minimum
  const double lse = -xmin / sigma + std::log((-(x - xmin) / sigma).exp().mean());
  const double mu = -sigma * lse;

  const GevParams<double> p(s.center + s.spread * mu, s.spread * sigma, 0.0);
  FitReport r{p, FitMethod::GumbelMaximumLikelihood};
  r.n_points = maxima.size();
  r.iterations = static_cast<int>(iters);
  r.objective = finite_or_throw(-gev_loglik(maxima, p), "fit_gumbel: non-finite likelihood");
  r.converged = iters < 200;
  if (!r.converged) throw NonConvergence("fit_gumbel: root finder hit its iteration limit");
  return r;
}

FitReport fit_block_tail(const BlockSummary& block, double h0, FitMethod method) {
  switch (method) {
    case FitMethod::LeastSquares: {
      const auto points =
          empirical_exceedance(block.tail_values, h0, static_cast<std::size_t>(std::max<int>(block.n_wet, 0)));
      return fit_weibull_ls(points, h0);
    }
    case FitMethod::MaximumLikelihood:
      return fit_weibull_mle(block.tail_values, h0);
    case FitMethod::GumbelMaximumLikelihood:
      break;
  }
  throw DomainError("fit_block_tail: method does not estimate a Weibull tail");
}

}  // namespace mev
