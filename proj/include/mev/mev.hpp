#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mev/blocks.hpp"
#include "mev/distributions.hpp"
#include "mev/fitting.hpp"

namespace mev {

struct MevComponent {
  double n;  // block cardinality (wet days)
  WeibullTail<double> tail;
};

// Discrete metastatistics factor: point masses at (n_j, C_j, w_j).
// Immutable once constructed.
class MevModel {
 public:
  explicit MevModel(std::vector<MevComponent> components);
  MevModel(std::vector<MevComponent> components, std::vector<double> weights);

  [[nodiscard]] const std::vector<MevComponent>& components() const { return components_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return components_.size(); }
  [[nodiscard]] double mean_cardinality() const;
  [[nodiscard]] double max_scale() const;
  [[nodiscard]] double min_shape() const;
  [[nodiscard]] double max_cardinality() const;

 private:
  std::vector<MevComponent> components_;
  std::vector<double> weights_;
};

/// Weighted mixture of penultimate block-maximum CDFs.
double mev_cdf(double y, const MevModel& model);
/// 1 - mev_cdf, summed from component survivals.
double mev_survival(double y, const MevModel& model);
Eigen::ArrayXd mev_cdf(const Eigen::ArrayXd& y, const MevModel& model);

/// Single tail with the mean cardinality standing in for the mixture.
double mev_cdf_homogeneous(double y, const WeibullTail<double>& tail, double mean_n);

/// Level y with mev_cdf(y) = 1 - 1/return_period.
double return_level(double return_period_years, const MevModel& model);

struct ReturnPeriod {
  double years;
  bool saturated;  // 1 - cdf fell below 1e-15; years is a sentinel
};
ReturnPeriod return_period(double y, const MevModel& model);

struct ExcludedWindow {
  std::string label;
  std::string reason;
};

struct MevBuild {
  MevModel model;
  std::vector<FitReport> fits;  // one per window that fitted
  std::vector<std::string> fitted_labels;
  std::vector<ExcludedWindow> excluded;
  std::vector<BlockSummary> dropped;  // trailing partial window
};

/// Per-window tail fits with per-year cardinalities. Windows that fail to
/// fit are excluded and reported; throws if none fits.
MevBuild build_mev_model(std::span<const BlockSummary> blocks, int window_width,
                         FitMethod method = FitMethod::LeastSquares, double h0 = kDefaultThreshold);

/// Same, over groups that are already merged (e.g. by merge_blocks).
MevBuild build_mev_model_from_windows(std::span<const BlockSummary> windows, FitMethod method = FitMethod::LeastSquares,
                                      double h0 = kDefaultThreshold);

nlohmann::json to_json(const MevModel& model);
MevModel mev_model_from_json(const nlohmann::json& doc);

}  // namespace mev
