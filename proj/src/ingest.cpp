#include "mev/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mev/errors.hpp"

namespace mev {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

bool is_missing(const std::string& cell) {
  std::string lower = cell;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.empty() || lower == "na" || lower == "nan" || lower == "missing";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

void StationConfig::validate() const {
  if (!(threshold_h0 >= 0)) throw ValidationError("config: threshold_h0 must be >= 0");
  if (!(wet_threshold >= 0)) throw ValidationError("config: wet_threshold must be >= 0");
  if (replicates < 2) throw ValidationError("config: replicates must be >= 2");
  for (int w : widths)
    if (w < 1) throw ValidationError("config: widths must be >= 1");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].first > intervals[i].second) throw ValidationError("config: interval start after end");
    if (i > 0 && intervals[i].first <= intervals[i - 1].second)
      throw ValidationError("config: intervals must be ordered and non-overlapping");
  }
}

StationConfig station_config_from_json(const nlohmann::json& doc) {
  try {
    StationConfig c;
    if (doc.contains("input_path")) c.input_path = doc.at("input_path").get<std::string>();
    c.date_column = doc.value("date_column", c.date_column);
    c.amount_column = doc.value("amount_column", c.amount_column);
    c.station = doc.value("station", c.station);
    c.threshold_h0 = doc.value("threshold_h0", c.threshold_h0);
    c.wet_threshold = doc.value("wet_threshold", c.wet_threshold);
    if (doc.contains("intervals"))
      for (const auto& iv : doc.at("intervals")) {
        const auto pair = iv.get<std::vector<int>>();
        if (pair.size() != 2) throw ValidationError("config: each interval is [start_year, end_year]");
        c.intervals.emplace_back(pair[0], pair[1]);
      }
    c.seed = doc.value("seed", c.seed);
    c.replicates = doc.value("replicates", c.replicates);
    if (doc.contains("widths")) c.widths = doc.at("widths").get<std::vector<int>>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("station config: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Date parse_iso_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    throw ValidationError("malformed date '" + text + "', expected YYYY-MM-DD");
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw ValidationError("invalid calendar date '" + text + "'");
  return date;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

DailySeries parse_daily_csv(const std::filesystem::path& path, const StationConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  const auto header = split_csv_line(line);
  const auto find_column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t date_col = find_column(config.date_column);
  const std::size_t amount_col = find_column(config.amount_column);

  struct Row {
    DailyRecord record;
    std::size_t row;
  };
  std::vector<Row> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() <= std::max(date_col, amount_col)) throw ParseError(row, "too few columns");
    Date date;
    try {
      date = parse_iso_date(cells[date_col]);
    } catch (const ValidationError& e) {
      throw ParseError(row, e.what());
    }
    const std::string& cell = cells[amount_col];
    if (is_missing(cell)) continue;  // recorded as a gap
    double amount = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), amount);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(amount))
      throw ParseError(row, "cannot parse amount '" + cell + "'");
    if (amount < 0) throw NegativeAmount(row, "negative amount " + cell);
    rows.push_back({{date, amount}, row});
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::chrono::sys_days{a.record.date} < std::chrono::sys_days{b.record.date};
  });
  std::vector<DailyRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].record.date == rows[i - 1].record.date)
      throw DuplicateDate(std::max(rows[i].row, rows[i - 1].row), "duplicate date " + format_iso_date(rows[i].record.date));
    records.push_back(rows[i].record);
  }
  return DailySeries(std::move(records), config.station, "source=" + path.filename().string());
}

DailySeries select_interval(const DailySeries& series, int start_year, int end_year) {
  if (start_year > end_year) throw DomainError("select_interval: start after end");
  std::vector<DailyRecord> kept;
  for (const auto& r : series.records()) {
    const int y = static_cast<int>(r.date.year());
    if (y >= start_year && y <= end_year) kept.push_back(r);
  }
  if (kept.empty())
    throw EmptyInterval("no records in " + std::to_string(start_year) + "-" + std::to_string(end_year));
  DailySeries out(std::move(kept), series.station(), series.notes());
  std::pair<int, int> interval{start_year, end_year};
  if (series.interval())
    interval = {std::max(start_year, series.interval()->first), std::min(end_year, series.interval()->second)};
  out.set_interval(interval);
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_daily_csv(const DailySeries& series, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "date,amount\n";
  for (const auto& r : series.records()) os << format_iso_date(r.date) << ',' << format_number(r.amount) << '\n';
  write_text_file(path, os.str());
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv" || s == "CSV") return OutputFormat::Csv;
  if (s == "json" || s == "JSON") return OutputFormat::Json;
  throw ValidationError("unknown output format '" + s + "'");
}

std::string format_number(double v) {
  if (!std::isfinite(v)) throw NonFiniteValue("cannot render non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string render_gumbel_plot(const std::vector<GumbelPlotSeries>& series, OutputFormat format) {
  for (const auto& s : series)
    for (const auto& p : s.points)
      if (!std::isfinite(p.y) || !std::isfinite(p.reduced_variate))
        throw NonFiniteValue("series '" + s.label + "' has a non-finite point");

  std::ostringstream os;
  if (format == OutputFormat::Csv) {
    os << "label,y_mm,reduced_variate,note\n";
    for (const auto& s : series)
      for (const auto& p : s.points)
        os << csv_escape(s.label) << ',' << format_number(p.y) << ',' << format_number(p.reduced_variate) << ','
           << (p.clamped ? "clamped" : "") << '\n';
  } else {
    // Numbers are emitted as raw literals so the 10-digit rendering survives.
    os << "{\"series\":[";
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (i) os << ',';
      os << "{\"label\":" << nlohmann::json(series[i].label).dump() << ",\"points\":[";
      for (std::size_t j = 0; j < series[i].points.size(); ++j) {
        const auto& p = series[i].points[j];
        if (j) os << ',';
        os << "{\"y_mm\":" << format_number(p.y) << ",\"reduced_variate\":" << format_number(p.reduced_variate)
           << ",\"clamped\":" << (p.clamped ? "true" : "false") << '}';
      }
      os << "]}";
    }
    os << "]}\n";
  }
  return os.str();
}

void export_gumbel_plot(const std::vector<GumbelPlotSeries>& series, const std::filesystem::path& path,
                        OutputFormat format) {
  write_text_file(path, render_gumbel_plot(series, format));
}

namespace {

std::vector<int> descending_widths(const EnvelopeResult& result) {
  std::vector<int> widths;
  for (const auto& [w, band] : result.bands) widths.push_back(w);
  std::sort(widths.begin(), widths.end(), std::greater<>());
  return widths;
}

}  // namespace

std::string render_envelope_csv(const EnvelopeResult& result) {
  std::ostringstream os;
  os << "y";
  const std::vector<int> widths = descending_widths(result);
  for (int w : widths) {
    for (double p : result.percentiles) os << ",w" << w << "_band_" << format_number(p);
    os << ",observed_w" << w;
  }
  os << '\n';
  for (Eigen::Index g = 0; g < result.y_grid.size(); ++g) {
    os << format_number(result.y_grid(g));
    for (int w : widths) {
      const auto& band = result.bands.at(w);
      for (Eigen::Index k = 0; k < band.rows(); ++k) os << ',' << format_number(band(k, g));
      os << ',' << format_number(result.observed.at(w).points[static_cast<std::size_t>(g)].reduced_variate);
    }
    os << '\n';
  }
  return os.str();
}

std::string render_envelope_summary(const EnvelopeResult& result) {
  const std::vector<int> widths = descending_widths(result);
  nlohmann::ordered_json summary;
  summary["null_tail"] = {{"C", std::stod(format_number(result.null_tail.scale))},
                         {"w", std::stod(format_number(result.null_tail.shape))}};
  summary["replicates_used"] = result.used_replicates;
  summary["replicates_dropped"] = result.dropped_replicates;
  summary["percentiles"] = result.percentiles;
  nlohmann::ordered_json fractions = nlohmann::ordered_json::object();
  for (int w : widths) {
    const double f = result.inside_fraction.at(w);
    fractions[std::to_string(w)] = {{"inside_fraction", std::stod(format_number(f))},
                                    {"consistent_with_homogeneity", f >= 0.9}};
  }
  summary["widths"] = fractions;
  return summary.dump(2) + "\n";
}

void export_envelope(const EnvelopeResult& result, const std::filesystem::path& csv_path,
                     const std::filesystem::path& json_path) {
  write_text_file(csv_path, render_envelope_csv(result));
  write_text_file(json_path, render_envelope_summary(result));
}

}  // namespace mev
