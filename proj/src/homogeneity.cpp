#include "mev/homogeneity.hpp"

#include <algorithm>
#include <cmath>

#include "mev/errors.hpp"
#include "mev/mev.hpp"
#include "mev/parallel.hpp"

namespace mev {

Eigen::MatrixXd percentile_bands(const Eigen::MatrixXd& samples, std::span<const double> percentiles) {
  if (samples.rows() < 1 || samples.cols() < 1) throw DomainError("percentile_bands: empty samples");
  for (double p : percentiles)
    if (!(p >= 0 && p <= 100)) throw DomainError("percentile_bands: percentile outside [0, 100]");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(percentiles.size()), samples.cols());
  std::vector<double> column(static_cast<std::size_t>(samples.rows()));
  const double last = static_cast<double>(samples.rows() - 1);
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    Eigen::Map<Eigen::VectorXd>(column.data(), samples.rows()) = samples.col(c);
    std::sort(column.begin(), column.end());
    for (std::size_t k = 0; k < percentiles.size(); ++k) {
      const double pos = percentiles[k] / 100.0 * last;
      const auto i = static_cast<std::size_t>(std::floor(pos));
      const std::size_t j = std::min(i + 1, column.size() - 1);
      const double f = pos - static_cast<double>(i);
      out(static_cast<Eigen::Index>(k), c) = column[i] + f * (column[j] - column[i]);
    }
  }
  return out;
}

EnvelopeResult envelope_test(std::span<const BlockSummary> blocks, std::span<const int> widths, int replicates,
                             const RandomStream& rng, const EnvelopeOptions& options) {
  if (blocks.empty()) throw ValidationError("envelope_test: no blocks");
  if (widths.empty()) throw ValidationError("envelope_test: no window widths");
  if (replicates < 2) throw DomainError("envelope_test: at least 2 replicates are needed for percentiles");
  if (options.percentiles.size() < 2) throw DomainError("envelope_test: need at least a lower and upper percentile");
  if (!std::is_sorted(options.percentiles.begin(), options.percentiles.end()))
    throw DomainError("envelope_test: percentiles must be ascending");
  for (int w : widths)
    if (w < 1 || static_cast<std::size_t>(w) > blocks.size())
      throw ValidationError("envelope_test: width " + std::to_string(w) + " outside [1, " +
                            std::to_string(blocks.size()) + "]");

  // Homogeneity null: one tail for the whole interval.
  const int whole = static_cast<int>(blocks.size());
  const BlockSummary merged = window_partition(blocks, whole).windows.front();
  const FitReport null_fit = fit_block_tail(merged, options.threshold, options.method);
  if (!null_fit.converged) throw NonConvergence("envelope_test: whole-interval tail fit failed: " + null_fit.diagnostics);

  EnvelopeResult result;
  result.null_tail = null_fit.tail();
  result.percentiles = options.percentiles;

  std::vector<int> cardinality;
  cardinality.reserve(blocks.size());
  std::vector<MevComponent> null_components;
  for (const auto& b : blocks) {
    cardinality.push_back(b.n_wet);
    if (b.n_wet >= 1) null_components.push_back({static_cast<double>(b.n_wet), result.null_tail});
  }
  if (null_components.empty()) throw InsufficientData("envelope_test: no wet days");
  const MevModel null_model(std::move(null_components));
  const double y_lo = return_level(1.0 / (1.0 - 0.01), null_model);
  const double y_hi = return_level(1.0 / (1.0 - 0.9999), null_model);
  result.y_grid = Eigen::ArrayXd::LinSpaced(options.grid_points, std::log(y_lo), std::log(y_hi)).exp();
  const Eigen::Index grid = result.y_grid.size();

  std::vector<Eigen::MatrixXd> samples(widths.size(), Eigen::MatrixXd(replicates, grid));
  std::vector<char> ok(static_cast<std::size_t>(replicates), 0);
  PartitionOptions popts;
  popts.tail_threshold = options.threshold;

  parallel_for(static_cast<std::size_t>(replicates), options.threads, [&](std::size_t r) {
    const RandomStream rep = rng.substream(r);
    std::vector<BlockSummary> synthetic;
    synthetic.reserve(blocks.size());
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const int n = cardinality[j];
      Eigen::ArrayXd values = Eigen::ArrayXd::Zero(std::max(n, 0));
      if (n > 0) {
        RandomStream year = rep.substream(j);
        values = weibull_sample(year, result.null_tail, n);
      }
      BlockSummary b = summarize_block(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                                       blocks[j].first_year, popts);
      synthetic.push_back(std::move(b));
    }
    try {
      for (std::size_t k = 0; k < widths.size(); ++k) {
        const MevBuild build = build_mev_model(synthetic, widths[k], options.method, options.threshold);
        samples[k].row(static_cast<Eigen::Index>(r)) = mev_cdf(result.y_grid, build.model).matrix().transpose();
      }
      ok[r] = 1;
    } catch (const InsufficientData&) {
    } catch (const DegenerateFit&) {
    } catch (const NonConvergence&) {
    }
  });

  std::vector<Eigen::Index> kept;
  for (std::size_t r = 0; r < ok.size(); ++r)
    if (ok[r]) kept.push_back(static_cast<Eigen::Index>(r));
  result.used_replicates = static_cast<int>(kept.size());
  result.dropped_replicates = replicates - result.used_replicates;
  if (result.dropped_replicates * 5 > replicates)
    throw NonConvergence("envelope_test: " + std::to_string(result.dropped_replicates) + " of " +
                         std::to_string(replicates) + " replicates failed to fit (limit 20%)");
  if (kept.size() < 2) throw InsufficientData("envelope_test: fewer than 2 usable replicates");

  for (std::size_t k = 0; k < widths.size(); ++k) {
    Eigen::MatrixXd used(static_cast<Eigen::Index>(kept.size()), grid);
    for (std::size_t i = 0; i < kept.size(); ++i) used.row(static_cast<Eigen::Index>(i)) = samples[k].row(kept[i]);
    Eigen::MatrixXd band = percentile_bands(used, options.percentiles);
    band = band.unaryExpr([](double p) { return reduced_variate(p); });

    const MevBuild observed = build_mev_model(blocks, widths[k], options.method, options.threshold);
    const Eigen::ArrayXd cdf = mev_cdf(result.y_grid, observed.model);
    GumbelPlotSeries series = make_gumbel_series("w" + std::to_string(widths[k]), result.y_grid, cdf);

    const Eigen::Index lower = 0;
    const Eigen::Index upper = band.rows() - 1;
    int inside = 0;
    for (Eigen::Index g = 0; g < grid; ++g) {
      const double z = series.points[static_cast<std::size_t>(g)].reduced_variate;
      if (z >= band(lower, g) && z <= band(upper, g)) ++inside;
    }
    result.inside_fraction[widths[k]] = static_cast<double>(inside) / static_cast<double>(grid);
    result.bands[widths[k]] = std::move(band);
    result.observed[widths[k]] = std::move(series);
  }
  return result;
}

}  // namespace mev
