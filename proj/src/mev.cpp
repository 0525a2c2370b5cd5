#include "mev/mev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mev/errors.hpp"

namespace mev {

MevModel::MevModel(std::vector<MevComponent> components)
    : MevModel(components, std::vector<double>(components.size(), components.empty() ? 0.0 : 1.0 / components.size())) {}

MevModel::MevModel(std::vector<MevComponent> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw ValidationError("MevModel: no components");
  if (weights_.size() != components_.size()) throw ValidationError("MevModel: one weight per component required");
  double total = 0;
  for (double w : weights_) {
    if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("MevModel: weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("MevModel: weights must sum to 1");
  for (const auto& c : components_)
    if (!(c.n >= 1)) throw ValidationError("MevModel: cardinalities must be >= 1");
}

double MevModel::mean_cardinality() const {
  double m = 0;
  for (std::size_t j = 0; j < components_.size(); ++j) m += weights_[j] * components_[j].n;
  return m;
}

double MevModel::max_scale() const {
  return std::max_element(components_.begin(), components_.end(),
                          [](const auto& a, const auto& b) { return a.tail.scale < b.tail.scale; })
      ->tail.scale;
}

double MevModel::min_shape() const {
  return std::min_element(components_.begin(), components_.end(),
                          [](const auto& a, const auto& b) { return a.tail.shape < b.tail.shape; })
      ->tail.shape;
}

double MevModel::max_cardinality() const {
  return std::max_element(components_.begin(), components_.end(), [](const auto& a, const auto& b) { return a.n < b.n; })
      ->n;
}

double mev_cdf(double y, const MevModel& model) {
  if (!(y >= 0)) throw DomainError("mev_cdf: y must be >= 0");
  double acc = 0;
  const auto& comps = model.components();
  const auto& w = model.weights();
  for (std::size_t j = 0; j < comps.size(); ++j) acc += w[j] * penultimate_cdf(y, comps[j].n, comps[j].tail);
  return acc;
}

double mev_survival(double y, const MevModel& model) {
  if (!(y >= 0)) throw DomainError("mev_survival: y must be >= 0");
  double acc = 0;
  const auto& comps = model.components();
  const auto& w = model.weights();
  for (std::size_t j = 0; j < comps.size(); ++j) acc += w[j] * penultimate_survival(y, comps[j].n, comps[j].tail);
  return acc;
}

Eigen::ArrayXd mev_cdf(const Eigen::ArrayXd& y, const MevModel& model) {
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(y.size());
  const auto& comps = model.components();
  const auto& w = model.weights();
  for (std::size_t j = 0; j < comps.size(); ++j) out += w[j] * penultimate_cdf(y, comps[j].n, comps[j].tail);
  return out;
}

double mev_cdf_homogeneous(double y, const WeibullTail<double>& tail, double mean_n) {
  return penultimate_cdf(y, mean_n, tail);
}

double return_level(double return_period_years, const MevModel& model) {
  if (!(return_period_years > 1)) throw DomainError("return_level: return period must exceed 1 year");
  const double target = 1.0 / return_period_years;  // survival
  // At this level every component's exceedance is below e^-50 / T_r.
  double lo = 0;
  double hi = model.max_scale() *
              std::pow(std::log(model.max_cardinality() * return_period_years) + 50.0, 1.0 / model.min_shape());
  for (int i = 0; i < 400 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mev_survival(mid, model) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ReturnPeriod return_period(double y, const MevModel& model) {
  const double s = mev_survival(y, model);
  if (s < 1e-15) return {std::numeric_limits<double>::max(), true};
  return {1.0 / s, false};
}

MevBuild build_mev_model(std::span<const BlockSummary> blocks, int window_width, FitMethod method, double h0) {
  if (blocks.empty()) throw ValidationError("build_mev_model: no blocks");
  WindowPartition parts = window_partition(blocks, window_width);
  MevBuild build = build_mev_model_from_windows(parts.windows, method, h0);
  build.dropped = std::move(parts.dropped);
  return build;
}

MevBuild build_mev_model_from_windows(std::span<const BlockSummary> windows, FitMethod method, double h0) {
  if (windows.empty()) throw ValidationError("build_mev_model: no windows");

  std::vector<MevComponent> components;
  std::vector<FitReport> fits;
  std::vector<std::string> labels;
  std::vector<ExcludedWindow> excluded;
  for (const auto& win : windows) {
    try {
      FitReport fit = fit_block_tail(win, h0, method);
      if (!fit.converged) {
        excluded.push_back({win.label, "fit did not converge: " + fit.diagnostics});
        continue;
      }
      for (int n : win.yearly_wet_days) {
        if (n >= 1) components.push_back({static_cast<double>(n), fit.tail()});
      }
      if (std::none_of(win.yearly_wet_days.begin(), win.yearly_wet_days.end(), [](int n) { return n >= 1; }))
        excluded.push_back({win.label, "no wet days"});
      fits.push_back(std::move(fit));
      labels.push_back(win.label);
    } catch (const InsufficientData& e) {
      excluded.push_back({win.label, std::string("InsufficientData: ") + e.what()});
    } catch (const DegenerateFit& e) {
      excluded.push_back({win.label, std::string("DegenerateFit: ") + e.what()});
    }
  }
  if (components.empty()) throw InsufficientData("build_mev_model: no window produced a usable tail fit");
  return MevBuild{MevModel(std::move(components)), std::move(fits), std::move(labels), std::move(excluded), {}};
}

nlohmann::json to_json(const MevModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : model.components())
    comps.push_back({{"n", c.n}, {"C", c.tail.scale}, {"w", c.tail.shape}, {"h0", c.tail.threshold}});
  return {{"components", comps}, {"weights", model.weights()}};
}

MevModel mev_model_from_json(const nlohmann::json& doc) {
  try {
    std::vector<MevComponent> comps;
    for (const auto& c : doc.at("components"))
      comps.push_back({c.at("n").get<double>(),
                       WeibullTail<double>(c.at("C").get<double>(), c.at("w").get<double>(), c.value("h0", 0.0))});
    if (doc.contains("weights")) return MevModel(std::move(comps), doc.at("weights").get<std::vector<double>>());
    return MevModel(std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("MEV model document: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(std::string("MEV model document: ") + e.what());
  }
}

}  // namespace mev
