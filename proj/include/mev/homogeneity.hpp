#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mev/blocks.hpp"
#include "mev/fitting.hpp"
#include "mev/montecarlo.hpp"
#include "mev/random.hpp"

namespace mev {

/// Linear-interpolation percentiles of each column of `samples`
/// (rows are replicates). Result is percentiles.size() x samples.cols().
Eigen::MatrixXd percentile_bands(const Eigen::MatrixXd& samples, std::span<const double> percentiles);

struct EnvelopeOptions {
  double threshold = kDefaultThreshold;
  std::vector<double> percentiles{5.0, 50.0, 95.0};
  int grid_points = 200;
  FitMethod method = FitMethod::LeastSquares;
  unsigned threads = 0;
};

struct EnvelopeResult {
  Eigen::ArrayXd y_grid;
  std::vector<double> percentiles;
  WeibullTail<double> null_tail{1.0, 1.0};
  // Per window width: percentile bands of the reduced variate, one row per
  // requested percentile, one column per grid level.
  std::map<int, Eigen::MatrixXd> bands;
  std::map<int, GumbelPlotSeries> observed;
  std::map<int, double> inside_fraction;  // against the outermost band pair
  int used_replicates = 0;
  int dropped_replicates = 0;
};

/// Monte Carlo percentile envelope of windowed MEV estimates under the
/// hypothesis that one tail describes every block, and the observed windowed
/// estimates judged against it.
EnvelopeResult envelope_test(std::span<const BlockSummary> blocks, std::span<const int> widths, int replicates,
                             const RandomStream& rng, const EnvelopeOptions& options = {});

}  // namespace mev
