#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>

#include "mev/blocks.hpp"
#include "mev/distributions.hpp"

namespace mev {

enum class FitMethod { LeastSquares, MaximumLikelihood, GumbelMaximumLikelihood };

std::string to_string(FitMethod m);
FitMethod fit_method_from_string(const std::string& s);

struct FitReport {
  FitReport(std::variant<WeibullTail<double>, GevParams<double>> p, FitMethod m) : params(std::move(p)), method(m) {}

  std::variant<WeibullTail<double>, GevParams<double>> params;
  FitMethod method = FitMethod::LeastSquares;
  std::size_t n_points = 0;
  bool converged = false;
  double objective = 0;  // residual sum of squares, or negative log-likelihood
  int iterations = 0;
  std::string diagnostics;

  [[nodiscard]] const WeibullTail<double>& tail() const { return std::get<WeibullTail<double>>(params); }
  [[nodiscard]] const GevParams<double>& gev() const { return std::get<GevParams<double>>(params); }
};

inline constexpr double kDefaultThreshold = 10.0;  // h0, mm

/// Ordinary least squares of ln(-ln psi) on ln h: slope w, intercept -w ln C.
FitReport fit_weibull_ls(std::span<const ExceedancePoint> points, double h0 = kDefaultThreshold);

struct MleOptions {
  std::optional<double> fixed_shape;  // estimate C only
  double min_shape = 0.02;
  double max_shape = 50.0;
};

/// Maximum likelihood for the left-truncated stretched exponential. Never
/// throws on optimizer failure; the report carries converged = false instead.
FitReport fit_weibull_mle(std::span<const double> values, double h0 = kDefaultThreshold, const MleOptions& options = {});

/// Log-likelihood of the values above tail.threshold under the truncated density.
double weibull_truncated_loglik(std::span<const double> values, const WeibullTail<double>& tail);

/// GEV maximum likelihood by downhill simplex from Gumbel moment estimates.
FitReport fit_gev(std::span<const double> maxima);

/// Gumbel (k = 0) maximum likelihood.
FitReport fit_gumbel(std::span<const double> maxima);

double gev_loglik(std::span<const double> maxima, const GevParams<double>& params);

/// Tail fit of one block: LS on the unconditional plotting positions of the
/// block's tail values among its n_wet wet days, or truncated MLE.
FitReport fit_block_tail(const BlockSummary& block, double h0, FitMethod method);

}  // namespace mev
