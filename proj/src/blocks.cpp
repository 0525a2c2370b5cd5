#include "mev/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mev/errors.hpp"

namespace mev {

namespace {

using std::chrono::sys_days;

int year_of(const Date& d) { return static_cast<int>(d.year()); }

}  // namespace

DailySeries::DailySeries(std::vector<DailyRecord> records, std::string station, std::string notes)
    : records_(std::move(records)), station_(std::move(station)), notes_(std::move(notes)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!r.date.ok()) throw ValidationError("DailySeries: invalid calendar date at record " + std::to_string(i));
    if (!std::isfinite(r.amount)) throw ValidationError("DailySeries: non-finite amount at record " + std::to_string(i));
    if (r.amount < 0) throw ValidationError("DailySeries: negative amount at record " + std::to_string(i));
    if (i == 0) continue;
    const sys_days prev{records_[i - 1].date};
    const sys_days cur{r.date};
    if (cur <= prev) throw ValidationError("DailySeries: dates must strictly increase (record " + std::to_string(i) + ")");
    if (cur - prev > std::chrono::days{1})
      gaps_.push_back({Date{prev + std::chrono::days{1}}, Date{cur - std::chrono::days{1}}});
  }
}

int DailySeries::first_year() const {
  if (records_.empty()) throw ValidationError("DailySeries: empty series");
  return year_of(records_.front().date);
}

int DailySeries::last_year() const {
  if (records_.empty()) throw ValidationError("DailySeries: empty series");
  return year_of(records_.back().date);
}

std::size_t DailySeries::missing_days() const {
  std::size_t total = 0;
  for (const auto& g : gaps_) total += static_cast<std::size_t>((sys_days{g.last} - sys_days{g.first}).count() + 1);
  return total;
}

BlockSummary summarize_block(std::span<const double> amounts, int year, const PartitionOptions& options) {
  BlockSummary b;
  b.label = std::to_string(year);
  b.first_year = b.last_year = year;
  b.n_days = amounts.size();
  for (double a : amounts) {
    if (a > options.wet_threshold) {
      ++b.n_wet;
      b.annual_max = b.annual_max ? std::max(*b.annual_max, a) : a;
    }
    if (a > options.tail_threshold) b.tail_values.push_back(a);
  }
  b.yearly_wet_days = {b.n_wet};
  return b;
}

std::vector<BlockSummary> partition_years(const DailySeries& series, const PartitionOptions& options) {
  if (series.empty()) throw ValidationError("partition_years: empty series");
  std::vector<BlockSummary> out;
  std::vector<double> amounts;
  int current = year_of(series.records().front().date);
  for (const auto& r : series.records()) {
    const int y = year_of(r.date);
    if (y != current) {
      out.push_back(summarize_block(amounts, current, options));
      amounts.clear();
      current = y;
    }
    amounts.push_back(r.amount);
  }
  out.push_back(summarize_block(amounts, current, options));
  return out;
}

BlockSummary merge_blocks(std::span<const BlockSummary> group) {
  if (group.empty()) throw DomainError("merge_blocks: empty group");
  BlockSummary m;
  m.first_year = group.front().first_year;
  m.last_year = group.back().last_year;
  m.label = m.first_year == m.last_year ? std::to_string(m.first_year)
                                        : std::to_string(m.first_year) + "-" + std::to_string(m.last_year);
  for (const auto& b : group) {
    m.n_wet += b.n_wet;
    m.n_days += b.n_days;
    m.yearly_wet_days.insert(m.yearly_wet_days.end(), b.yearly_wet_days.begin(), b.yearly_wet_days.end());
    m.tail_values.insert(m.tail_values.end(), b.tail_values.begin(), b.tail_values.end());
    if (b.annual_max) m.annual_max = m.annual_max ? std::max(*m.annual_max, *b.annual_max) : *b.annual_max;
  }
  return m;
}

WindowPartition window_partition(std::span<const BlockSummary> blocks, int width) {
  if (width < 1) throw DomainError("window_partition: width must be >= 1");
  if (static_cast<std::size_t>(width) > blocks.size())
    throw ValidationError("window_partition: width " + std::to_string(width) + " exceeds the " +
                          std::to_string(blocks.size()) + " available blocks");
  WindowPartition result;
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t full = blocks.size() / w;
  for (std::size_t g = 0; g < full; ++g) result.windows.push_back(merge_blocks(blocks.subspan(g * w, w)));
  for (std::size_t i = full * w; i < blocks.size(); ++i) result.dropped.push_back(blocks[i]);
  return result;
}

std::vector<ExceedancePoint> empirical_exceedance(std::span<const double> values, double threshold,
                                                  std::optional<std::size_t> sample_size) {
  std::vector<double> kept;
  std::copy_if(values.begin(), values.end(), std::back_inserter(kept), [threshold](double v) { return v > threshold; });
  if (kept.size() < 3)
    throw InsufficientData("empirical_exceedance: " + std::to_string(kept.size()) +
                           " values above threshold, need at least 3");
  const std::size_t total = sample_size.value_or(kept.size());
  if (total < kept.size()) throw DomainError("empirical_exceedance: sample_size smaller than the retained values");

  std::stable_sort(kept.begin(), kept.end());
  const std::size_t offset = total - kept.size();
  const double n = static_cast<double>(total);
  std::vector<ExceedancePoint> out;
  out.reserve(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const double rank = static_cast<double>(offset + j + 1);
    out.push_back({kept[j], 1.0 - (rank - 0.5) / n});
  }
  return out;
}

}  // namespace mev
