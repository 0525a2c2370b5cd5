#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "mev/blocks.hpp"
#include "mev/distributions.hpp"
#include "mev/fitting.hpp"
#include "mev/mev.hpp"
#include "mev/random.hpp"

namespace mev {

// How the MEV estimate of an experiment groups years for its tail fits:
// consecutive windows of mev_window years, or all years that share one
// parameter_table entry.
enum class MevPooling { Window, Regime };

std::string to_string(MevPooling p);
MevPooling mev_pooling_from_string(const std::string& s);

// Synthetic block-maxima experiment: n_years blocks of Weibull daily
// amounts whose (C, w) cycles through parameter_table every regime_length
// years (never, when regime_length is empty).
struct ExperimentSpec {
  int n_years = 50;
  int n_wet_per_year = 100;
  std::optional<int> regime_length;
  std::vector<WeibullTail<double>> parameter_table{WeibullTail<double>(10.0, 0.8)};
  std::uint64_t seed = 20240101;
  int replicates = 200;
  std::size_t truth_maxima = 1'000'000;
  double threshold = 10.0;  // h0 used by the tail fits
  int mev_window = 1;       // years per tail fit in the MEV estimate
  FitMethod mev_fit = FitMethod::LeastSquares;
  MevPooling mev_pooling = MevPooling::Regime;
  // Per-year cardinality drawn uniformly from [first, second] when set.
  std::optional<std::pair<int, int>> cardinality_range;
  int grid_points = 200;
  unsigned threads = 0;

  void validate() const;
  [[nodiscard]] const WeibullTail<double>& regime_tail(int year) const;
  [[nodiscard]] double max_scale() const;
  [[nodiscard]] std::size_t regime_index(int year) const;

  // Experiments 1-3 with the shipped parameter tables.
  static ExperimentSpec preset(int experiment);
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& doc);

struct GumbelPlotPoint {
  double y;
  double reduced_variate;
  bool clamped = false;  // probability hit the clamp before the double log
};

struct GumbelPlotSeries {
  std::string label;
  std::vector<GumbelPlotPoint> points;
};

/// Gumbel-plot series of a CDF sampled on a grid.
GumbelPlotSeries make_gumbel_series(std::string label, const Eigen::ArrayXd& y, const Eigen::ArrayXd& cdf);

/// One array of daily amounts per year. Cardinalities come from
/// rng.substream(kCardinalityStream), year j draws from rng.substream(j).
std::vector<Eigen::ArrayXd> generate_experiment(const ExperimentSpec& spec, const RandomStream& rng);

inline constexpr std::uint64_t kCardinalityStream = 0xCA4D'0000'0000'0001ULL;
inline constexpr std::uint64_t kTruthStream = 0x7407'0000'0000'0001ULL;

/// MEV estimate from one replicate's yearly summaries, pooled by spec.mev_pooling.
MevBuild experiment_mev_model(const ExperimentSpec& spec, const std::vector<BlockSummary>& blocks);

/// Yearly summaries of synthetic data, labelled by year index starting at 1.
std::vector<BlockSummary> summarize_years(const std::vector<Eigen::ArrayXd>& years, double threshold);

struct TruthCurve {
  Eigen::ArrayXd sorted_maxima;
  GumbelPlotSeries series;

  // Empirical quantile and CDF of the simulated maxima.
  [[nodiscard]] double quantile(double p) const;
  [[nodiscard]] double cdf(double y) const;
};

inline constexpr std::size_t kMinTruthMaxima = 10'000;

/// Brute-force maxima of the experiment's block cycle, sorted, with plotting
/// position (j - 0.5)/N. Chunks of n_years maxima use independent
/// substreams, so the result does not depend on `threads`.
TruthCurve truth_curve(const ExperimentSpec& spec, std::size_t n_maxima, const RandomStream& rng, unsigned threads = 0);

/// Log-spaced levels between the truth quantiles at probabilities lo and hi.
Eigen::ArrayXd evaluation_grid(const TruthCurve& truth, int points, double lo = 0.01, double hi = 0.9999);

struct Comparison {
  Eigen::ArrayXd y_grid;
  Eigen::ArrayXd mev;  // pointwise medians of the CDF estimates
  Eigen::ArrayXd gev;
  Eigen::ArrayXd gumbel;
  GumbelPlotSeries mev_series;
  GumbelPlotSeries gev_series;
  GumbelPlotSeries gumbel_series;
  TruthCurve truth;
  int used_replicates = 0;
  int dropped_replicates = 0;
};

/// Replicated MEV / GEV / Gumbel estimates, pointwise medians, and truth,
/// on the log-spaced grid spanning the truth curve.
Comparison compare_estimators(const ExperimentSpec& spec);
/// Same, evaluated on a caller-supplied grid.
Comparison compare_estimators(const ExperimentSpec& spec, const Eigen::ArrayXd& y_grid);

/// Column-wise lower median over the rows flagged valid.
Eigen::ArrayXd lower_median(const Eigen::MatrixXd& samples, const std::vector<bool>& valid);

}  // namespace mev
