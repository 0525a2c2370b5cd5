#include "mev/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mev/errors.hpp"
#include "mev/fitting.hpp"
#include "mev/parallel.hpp"

namespace mev {

std::string to_string(MevPooling p) { return p == MevPooling::Window ? "window" : "regime"; }

MevPooling mev_pooling_from_string(const std::string& s) {
  if (s == "window") return MevPooling::Window;
  if (s == "regime") return MevPooling::Regime;
  throw ValidationError("unknown MEV pooling '" + s + "' (window|regime)");
}

void ExperimentSpec::validate() const {
  if (n_years < 1) throw ValidationError("experiment: n_years must be >= 1");
  if (n_wet_per_year < 1) throw ValidationError("experiment: n_wet_per_year must be >= 1");
  if (regime_length && *regime_length < 1) throw ValidationError("experiment: regime_length must be >= 1");
  if (parameter_table.empty()) throw ValidationError("experiment: parameter_table is empty");
  if (replicates < 1) throw ValidationError("experiment: replicates must be >= 1");
  if (mev_window < 1 || mev_window > n_years) throw ValidationError("experiment: mev_window out of range");
  if (grid_points < 2) throw ValidationError("experiment: grid_points must be >= 2");
  if (truth_maxima < kMinTruthMaxima) throw ValidationError("experiment: truth_maxima must be >= 10000");
  if (cardinality_range && (cardinality_range->first < 1 || cardinality_range->second < cardinality_range->first))
    throw ValidationError("experiment: invalid cardinality range");
}

std::size_t ExperimentSpec::regime_index(int year) const {
  if (!regime_length) return 0;
  return static_cast<std::size_t>(year / *regime_length) % parameter_table.size();
}

const WeibullTail<double>& ExperimentSpec::regime_tail(int year) const { return parameter_table[regime_index(year)]; }

double ExperimentSpec::max_scale() const {
  double m = 0;
  for (const auto& t : parameter_table) m = std::max(m, t.scale);
  return m;
}

ExperimentSpec ExperimentSpec::preset(int experiment) {
  ExperimentSpec spec;
  switch (experiment) {
    case 1:
      return spec;
    case 2:
    case 3:
      spec.regime_length = experiment == 2 ? 5 : 2;
      spec.parameter_table = {WeibullTail<double>(8, 0.75), WeibullTail<double>(10, 0.8), WeibullTail<double>(12, 0.7),
                              WeibullTail<double>(9, 0.85), WeibullTail<double>(11, 0.75)};
      return spec;
    default:
      throw ValidationError("experiment preset must be 1, 2 or 3");
  }
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& t : spec.parameter_table) table.push_back({{"C", t.scale}, {"w", t.shape}});
  nlohmann::json doc = {{"n_years", spec.n_years},
                        {"n_wet_per_year", spec.n_wet_per_year},
                        {"regime_length", nullptr},
                        {"parameter_table", table},
                        {"seed", spec.seed},
                        {"replicates", spec.replicates},
                        {"truth_maxima", spec.truth_maxima},
                        {"threshold", spec.threshold},
                        {"mev_window", spec.mev_window},
                        {"mev_fit_method", to_string(spec.mev_fit)},
                        {"mev_pooling", to_string(spec.mev_pooling)},
                        {"cardinality_range", nullptr},
                        {"grid_points", spec.grid_points}};
  if (spec.regime_length) doc["regime_length"] = *spec.regime_length;
  if (spec.cardinality_range)
    doc["cardinality_range"] = {spec.cardinality_range->first, spec.cardinality_range->second};
  return doc;
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& doc) {
  try {
    ExperimentSpec spec = doc.contains("experiment") ? ExperimentSpec::preset(doc.at("experiment").get<int>())
                                                     : ExperimentSpec{};
    spec.n_years = doc.value("n_years", spec.n_years);
    spec.n_wet_per_year = doc.value("n_wet_per_year", spec.n_wet_per_year);
    if (doc.contains("regime_length")) {
      const auto& r = doc.at("regime_length");
      if (r.is_null() || (r.is_string() && r.get<std::string>() == "inf"))
        spec.regime_length.reset();
      else
        spec.regime_length = r.get<int>();
    }
    if (doc.contains("parameter_table")) {
      spec.parameter_table.clear();
      for (const auto& row : doc.at("parameter_table"))
        spec.parameter_table.emplace_back(row.at("C").get<double>(), row.at("w").get<double>());
    }
    spec.seed = doc.value("seed", spec.seed);
    spec.replicates = doc.value("replicates", spec.replicates);
    spec.truth_maxima = doc.value("truth_maxima", spec.truth_maxima);
    spec.threshold = doc.value("threshold", spec.threshold);
    spec.mev_window = doc.value("mev_window", spec.mev_window);
    if (doc.contains("mev_fit_method")) spec.mev_fit = fit_method_from_string(doc.at("mev_fit_method").get<std::string>());
    if (doc.contains("mev_pooling")) spec.mev_pooling = mev_pooling_from_string(doc.at("mev_pooling").get<std::string>());
    if (doc.contains("cardinality_range") && !doc.at("cardinality_range").is_null()) {
      const auto range = doc.at("cardinality_range").get<std::vector<int>>();
      if (range.size() != 2) throw ValidationError("experiment: cardinality_range needs [min, max]");
      spec.cardinality_range = std::make_pair(range[0], range[1]);
    }
    spec.grid_points = doc.value("grid_points", spec.grid_points);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
}

GumbelPlotSeries make_gumbel_series(std::string label, const Eigen::ArrayXd& y, const Eigen::ArrayXd& cdf) {
  GumbelPlotSeries s{std::move(label), {}};
  s.points.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = cdf(i);
    const bool clamped = !(p >= kProbabilityFloor && p <= kProbabilityCeiling);
    s.points.push_back({y(i), reduced_variate(p), clamped});
  }
  return s;
}

std::vector<Eigen::ArrayXd> generate_experiment(const ExperimentSpec& spec, const RandomStream& rng) {
  spec.validate();
  std::vector<int> cardinality(static_cast<std::size_t>(spec.n_years), spec.n_wet_per_year);
  if (spec.cardinality_range) {
    RandomStream cards = rng.substream(kCardinalityStream);
    for (auto& n : cardinality)
      n = static_cast<int>(cards.uniform_int(spec.cardinality_range->first, spec.cardinality_range->second));
  }
  std::vector<Eigen::ArrayXd> years;
  years.reserve(cardinality.size());
  for (int j = 0; j < spec.n_years; ++j) {
    RandomStream year_stream = rng.substream(static_cast<std::uint64_t>(j));
    years.push_back(weibull_sample(year_stream, spec.regime_tail(j), cardinality[static_cast<std::size_t>(j)]));
  }
  return years;
}

MevBuild experiment_mev_model(const ExperimentSpec& spec, const std::vector<BlockSummary>& blocks) {
  if (spec.mev_pooling == MevPooling::Window) return build_mev_model(blocks, spec.mev_window, spec.mev_fit, spec.threshold);
  std::vector<std::vector<BlockSummary>> groups(spec.parameter_table.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) groups[spec.regime_index(static_cast<int>(j))].push_back(blocks[j]);
  std::vector<BlockSummary> pooled;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    BlockSummary m = merge_blocks(groups[g]);
    m.label = "regime" + std::to_string(g);
    pooled.push_back(std::move(m));
  }
  return build_mev_model_from_windows(pooled, spec.mev_fit, spec.threshold);
}

std::vector<BlockSummary> summarize_years(const std::vector<Eigen::ArrayXd>& years, double threshold) {
  std::vector<BlockSummary> blocks;
  blocks.reserve(years.size());
  PartitionOptions opts;
  opts.tail_threshold = threshold;
  for (std::size_t j = 0; j < years.size(); ++j)
    blocks.push_back(summarize_block(std::span<const double>(years[j].data(), static_cast<std::size_t>(years[j].size())),
                                     static_cast<int>(j + 1), opts));
  return blocks;
}

double TruthCurve::quantile(double p) const {
  const auto n = sorted_maxima.size();
  if (n == 0) throw InsufficientData("truth curve is empty");
  const double pos = std::clamp(p * static_cast<double>(n) - 0.5, 0.0, static_cast<double>(n - 1));
  const auto i = static_cast<Eigen::Index>(std::floor(pos));
  const auto k = std::min<Eigen::Index>(i + 1, n - 1);
  const double f = pos - static_cast<double>(i);
  return sorted_maxima(i) * (1 - f) + sorted_maxima(k) * f;
}

double TruthCurve::cdf(double y) const {
  const auto n = sorted_maxima.size();
  if (n == 0) throw InsufficientData("truth curve is empty");
  // inverse of quantile(): piecewise linear through ((j - 0.5)/N, m_j)
  const double* begin = sorted_maxima.data();
  const double* end = begin + n;
  const double* it = std::upper_bound(begin, end, y);
  const auto idx = it - begin;  // number of maxima <= y
  const double nn = static_cast<double>(n);
  if (idx == 0) return 0.5 / nn;
  if (idx == n) return (nn - 0.5) / nn;
  const double lo = begin[idx - 1];
  const double hi = begin[idx];
  const double f = hi > lo ? (y - lo) / (hi - lo) : 0.0;
  return (static_cast<double>(idx) - 0.5 + f) / nn;
}

TruthCurve truth_curve(const ExperimentSpec& spec, std::size_t n_maxima, const RandomStream& rng, unsigned threads) {
  spec.validate();
  if (n_maxima < kMinTruthMaxima) throw DomainError("truth_curve: n_maxima must be >= 10000");
  const std::size_t per_chunk = static_cast<std::size_t>(spec.n_years);
  const std::size_t chunks = (n_maxima + per_chunk - 1) / per_chunk;
  Eigen::ArrayXd maxima(static_cast<Eigen::Index>(n_maxima));

  parallel_for(chunks, threads, [&](std::size_t c) {
    RandomStream stream = rng.substream(c);
    const std::size_t first = c * per_chunk;
    const std::size_t last = std::min(first + per_chunk, n_maxima);
    for (std::size_t i = first; i < last; ++i) {
      const int year = static_cast<int>(i - first);
      int n = spec.n_wet_per_year;
      if (spec.cardinality_range)
        n = static_cast<int>(stream.uniform_int(spec.cardinality_range->first, spec.cardinality_range->second));
      const auto& tail = spec.regime_tail(year);
      const double inv_shape = 1.0 / tail.shape;
      double best = 0;
      for (int d = 0; d < n; ++d) best = std::max(best, tail.scale * std::pow(-std::log(stream.uniform()), inv_shape));
      maxima(static_cast<Eigen::Index>(i)) = best;
    }
  });

  std::sort(maxima.data(), maxima.data() + maxima.size());
  TruthCurve truth;
  truth.series.label = "truth";
  truth.series.points.reserve(n_maxima);
  const double nn = static_cast<double>(n_maxima);
  for (std::size_t j = 0; j < n_maxima; ++j) {
    const double p = (static_cast<double>(j) + 0.5) / nn;
    truth.series.points.push_back({maxima(static_cast<Eigen::Index>(j)), -std::log(-std::log(p)), false});
  }
  truth.sorted_maxima = std::move(maxima);
  return truth;
}

Eigen::ArrayXd evaluation_grid(const TruthCurve& truth, int points, double lo, double hi) {
  const double y_lo = truth.quantile(lo);
  const double y_hi = truth.quantile(hi);
  if (!(y_lo > 0) || !(y_hi > y_lo)) throw DegenerateFit("evaluation_grid: truth quantiles do not span a range");
  return Eigen::ArrayXd::LinSpaced(points, std::log(y_lo), std::log(y_hi)).exp();
}

Eigen::ArrayXd lower_median(const Eigen::MatrixXd& samples, const std::vector<bool>& valid) {
  Eigen::ArrayXd out(samples.cols());
  std::vector<double> column;
  column.reserve(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    column.clear();
    for (Eigen::Index r = 0; r < samples.rows(); ++r)
      if (valid[static_cast<std::size_t>(r)]) column.push_back(samples(r, c));
    if (column.empty()) throw InsufficientData("lower_median: no valid samples");
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>((column.size() - 1) / 2);
    std::nth_element(column.begin(), mid, column.end());
    out(c) = *mid;
  }
  return out;
}

Comparison compare_estimators(const ExperimentSpec& spec) { return compare_estimators(spec, Eigen::ArrayXd()); }

Comparison compare_estimators(const ExperimentSpec& spec, const Eigen::ArrayXd& y_grid) {
  spec.validate();
  const RandomStream root(spec.seed);
  Comparison out;
  out.truth = truth_curve(spec, spec.truth_maxima, root.substream(kTruthStream), spec.threads);
  out.y_grid = y_grid.size() > 0 ? y_grid : evaluation_grid(out.truth, spec.grid_points);

  const auto reps = static_cast<std::size_t>(spec.replicates);
  const Eigen::Index grid = out.y_grid.size();
  Eigen::MatrixXd mev_s(static_cast<Eigen::Index>(reps), grid);
  Eigen::MatrixXd gev_s(static_cast<Eigen::Index>(reps), grid);
  Eigen::MatrixXd gum_s(static_cast<Eigen::Index>(reps), grid);
  std::vector<char> ok(reps, 0);

  parallel_for(reps, spec.threads, [&](std::size_t r) {
    const auto row = static_cast<Eigen::Index>(r);
    try {
      const auto years = generate_experiment(spec, root.substream(r));
      const auto blocks = summarize_years(years, spec.threshold);
      const MevBuild build = experiment_mev_model(spec, blocks);
      std::vector<double> maxima;
      maxima.reserve(blocks.size());
      for (const auto& b : blocks) maxima.push_back(b.annual_max.value_or(0.0));
      const FitReport gev = fit_gev(maxima);
      const FitReport gum = fit_gumbel(maxima);
      mev_s.row(row) = mev_cdf(out.y_grid, build.model).matrix().transpose();
      gev_s.row(row) = gev_cdf(out.y_grid, gev.gev()).matrix().transpose();
      gum_s.row(row) = gev_cdf(out.y_grid, gum.gev()).matrix().transpose();
      ok[r] = 1;
    } catch (const InsufficientData&) {
    } catch (const DegenerateFit&) {
    } catch (const NonConvergence&) {
    } catch (const DomainError&) {
    }
  });

  const std::vector<bool> valid(ok.begin(), ok.end());
  out.used_replicates = static_cast<int>(std::count(valid.begin(), valid.end(), true));
  out.dropped_replicates = spec.replicates - out.used_replicates;
  if (out.dropped_replicates * 5 > spec.replicates)
    throw NonConvergence("compare_estimators: " + std::to_string(out.dropped_replicates) + " of " +
                         std::to_string(spec.replicates) + " replicates failed to fit (limit 20%)");

  out.mev = lower_median(mev_s, valid);
  out.gev = lower_median(gev_s, valid);
  out.gumbel = lower_median(gum_s, valid);
  out.mev_series = make_gumbel_series("mev", out.y_grid, out.mev);
  out.gev_series = make_gumbel_series("gev", out.y_grid, out.gev);
  out.gumbel_series = make_gumbel_series("gumbel", out.y_grid, out.gumbel);
  return out;
}

}  // namespace mev
