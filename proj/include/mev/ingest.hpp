#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mev/blocks.hpp"
#include "mev/homogeneity.hpp"
#include "mev/montecarlo.hpp"

namespace mev {

struct StationConfig {
  std::filesystem::path input_path;
  std::string date_column = "date";
  std::string amount_column = "amount";
  std::string station;
  double threshold_h0 = 10.0;
  double wet_threshold = 0.0;
  std::vector<std::pair<int, int>> intervals;  // inclusive year ranges, ordered and disjoint
  std::uint64_t seed = 20240101;
  int replicates = 200;
  std::vector<int> widths{10, 5, 2, 1};

  void validate() const;
};

StationConfig station_config_from_json(const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Parses "YYYY-MM-DD"; throws ValidationError on malformed or impossible dates.
Date parse_iso_date(const std::string& text);
std::string format_iso_date(const Date& d);

/// Reads a headed CSV of (date, amount) rows. Empty or NA amounts are
/// treated as missing days. Row numbers in errors count the header as row 1.
DailySeries parse_daily_csv(const std::filesystem::path& path, const StationConfig& config);

/// Records with year in [start_year, end_year].
DailySeries select_interval(const DailySeries& series, int start_year, int end_year);

void write_daily_csv(const DailySeries& series, const std::filesystem::path& path);

enum class OutputFormat { Csv, Json };
OutputFormat output_format_from_string(const std::string& s);

/// Shortest round-trip-stable rendering with 10 significant digits.
std::string format_number(double v);

/// (label, y_mm, reduced_variate, note) rows, or the JSON equivalent.
std::string render_gumbel_plot(const std::vector<GumbelPlotSeries>& series, OutputFormat format);
void export_gumbel_plot(const std::vector<GumbelPlotSeries>& series, const std::filesystem::path& path,
                        OutputFormat format);

/// Envelope bands and observed curves per width as CSV, summary as JSON.
std::string render_envelope_csv(const EnvelopeResult& result);
std::string render_envelope_summary(const EnvelopeResult& result);
void export_envelope(const EnvelopeResult& result, const std::filesystem::path& csv_path,
                     const std::filesystem::path& json_path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mev
