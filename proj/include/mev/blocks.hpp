#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mev {

using Date = std::chrono::year_month_day;

struct DailyRecord {
  Date date;
  double amount;  // mm

  friend bool operator==(const DailyRecord&, const DailyRecord&) = default;
};

// Run of consecutive calendar days with no record.
struct Gap {
  Date first;
  Date last;
  friend bool operator==(const Gap&, const Gap&) = default;
};

// Daily precipitation record. Dates strictly increase and amounts are
// non-negative; missing days are allowed and listed in gaps().
class DailySeries {
 public:
  DailySeries() = default;
  explicit DailySeries(std::vector<DailyRecord> records, std::string station = {}, std::string notes = {});

  [[nodiscard]] const std::vector<DailyRecord>& records() const { return records_; }
  [[nodiscard]] const std::vector<Gap>& gaps() const { return gaps_; }
  [[nodiscard]] const std::string& station() const { return station_; }
  [[nodiscard]] const std::string& notes() const { return notes_; }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] int first_year() const;
  [[nodiscard]] int last_year() const;
  [[nodiscard]] std::size_t missing_days() const;

  // Analysis interval this series was restricted to, if any.
  [[nodiscard]] const std::optional<std::pair<int, int>>& interval() const { return interval_; }
  void set_interval(std::pair<int, int> years) { interval_ = years; }

  friend bool operator==(const DailySeries&, const DailySeries&) = default;

 private:
  std::vector<DailyRecord> records_;
  std::vector<Gap> gaps_;
  std::string station_;
  std::string notes_;
  std::optional<std::pair<int, int>> interval_;
};

// Per-block (year or merged window) summary of the parent record.
struct BlockSummary {
  std::string label;
  int first_year = 0;
  int last_year = 0;
  int n_wet = 0;
  std::vector<int> yearly_wet_days;        // one entry per calendar year in the block
  std::optional<double> annual_max;        // empty when the block has no wet day
  std::vector<double> tail_values;         // amounts above the tail threshold, recorded order
  std::size_t n_days = 0;                  // recorded days, wet or dry

  [[nodiscard]] bool degenerate() const { return n_wet == 0; }
  [[nodiscard]] std::size_t n_years() const { return yearly_wet_days.size(); }
};

struct PartitionOptions {
  double tail_threshold = 10.0;  // h0, mm
  double wet_threshold = 0.0;    // wet day <=> amount > wet_threshold
};

/// One summary per calendar year present in the series.
std::vector<BlockSummary> partition_years(const DailySeries& series, const PartitionOptions& options = {});

/// Summary of a single block given its raw wet-day amounts. Dry days may be
/// included; they are not counted as wet.
BlockSummary summarize_block(std::span<const double> amounts, int year, const PartitionOptions& options = {});

struct WindowPartition {
  std::vector<BlockSummary> windows;
  std::vector<BlockSummary> dropped;  // trailing blocks that did not fill a window
};

/// Blocks pooled into one summary; the label spans first to last year.
BlockSummary merge_blocks(std::span<const BlockSummary> group);

/// Consecutive non-overlapping groups of `width` blocks, merged.
WindowPartition window_partition(std::span<const BlockSummary> blocks, int width);

struct ExceedancePoint {
  double h;
  double psi;
};

/// Empirical exceedance of the values above `threshold` with plotting
/// position psi = 1 - (rank - 0.5) / N. By default ranks and N refer to the
/// retained values only. When `sample_size` is given, the values are taken
/// as the upper part of a larger sample of that size (the rest lying at or
/// below the threshold), so psi estimates the unconditional exceedance.
std::vector<ExceedancePoint> empirical_exceedance(std::span<const double> values, double threshold,
                                                  std::optional<std::size_t> sample_size = std::nullopt);

}  // namespace mev
