// mevtool: command-line front end for the MEV library.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 a fit or
// simulation did not converge, 4 file I/O failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mev/blocks.hpp"
#include "mev/errors.hpp"
#include "mev/fitting.hpp"
#include "mev/homogeneity.hpp"
#include "mev/ingest.hpp"
#include "mev/mev.hpp"
#include "mev/montecarlo.hpp"

namespace {

using namespace mev;

enum ExitCode { kOk = 0, kInvalid = 2, kNoConvergence = 3, kIo = 4 };

struct Shared {
  std::string config;
  std::string input;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<int> reps;
  std::vector<int> widths;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
  std::string interval;
};

struct Cell {
  std::string text;
  bool number;
};

Cell num(double v) { return {format_number(v), true}; }
Cell num(long long v) { return {std::to_string(v), true}; }
Cell str(std::string s) { return {std::move(s), false}; }
Cell flag(bool b) { return {b ? "true" : "false", true}; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  [[nodiscard]] std::string render(OutputFormat format) const {
    std::ostringstream os;
    if (format == OutputFormat::Csv) {
      for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
      os << '\n';
      for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c].text;
        os << '\n';
      }
      return os.str();
    }
    os << "[";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      os << (r ? ",\n " : "") << "{";
      for (std::size_t c = 0; c < header.size(); ++c) {
        const Cell& cell = rows[r][c];
        os << (c ? "," : "") << nlohmann::json(header[c]).dump() << ":"
           << (cell.number ? cell.text : nlohmann::json(cell.text).dump());
      }
      os << "}";
    }
    os << "]\n";
    return os.str();
  }
};

void emit(const Shared& opt, const std::string& content) {
  if (opt.out.empty())
    std::cout << content;
  else
    write_text_file(opt.out, content);
}

OutputFormat output_format(const Shared& opt) { return output_format_from_string(opt.format); }

std::pair<int, int> parse_interval(const std::string& text) {
  int a = 0;
  int b = 0;
  char sep = 0;
  std::istringstream is(text);
  if (!(is >> a >> sep >> b) || (sep != '-' && sep != ':') || !is.eof())
    throw ValidationError("--interval expects START-END years, got '" + text + "'");
  if (a > b) throw ValidationError("--interval start after end");
  return {a, b};
}

StationConfig station_config(const Shared& opt) {
  StationConfig cfg = opt.config.empty() ? StationConfig{} : station_config_from_json(read_json_file(opt.config));
  if (!opt.input.empty()) cfg.input_path = opt.input;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threshold) cfg.threshold_h0 = *opt.threshold;
  if (opt.reps) cfg.replicates = *opt.reps;
  if (!opt.widths.empty()) cfg.widths = opt.widths;
  if (cfg.input_path.empty()) throw ValidationError("no input file: pass --input or set input_path in the config");
  if (!opt.config.empty() && cfg.input_path.is_relative() && opt.input.empty())
    cfg.input_path = std::filesystem::path(opt.config).parent_path() / cfg.input_path;
  cfg.validate();
  return cfg;
}

DailySeries load_series(const Shared& opt, const StationConfig& cfg) {
  DailySeries series = parse_daily_csv(cfg.input_path, cfg);
  if (!opt.interval.empty()) {
    const auto [a, b] = parse_interval(opt.interval);
    series = select_interval(series, a, b);
  }
  return series;
}

std::vector<BlockSummary> year_blocks(const DailySeries& series, const StationConfig& cfg) {
  PartitionOptions po;
  po.tail_threshold = cfg.threshold_h0;
  po.wet_threshold = cfg.wet_threshold;
  return partition_years(series, po);
}

ExperimentSpec experiment_spec(const Shared& opt, int preset, std::optional<std::size_t> truth_maxima) {
  ExperimentSpec spec =
      opt.config.empty() ? ExperimentSpec::preset(preset) : experiment_spec_from_json(read_json_file(opt.config));
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.threshold) spec.threshold = *opt.threshold;
  if (opt.reps) spec.replicates = *opt.reps;
  if (truth_maxima) spec.truth_maxima = *truth_maxima;
  spec.threads = opt.threads;
  spec.validate();
  return spec;
}

// --- subcommands ---------------------------------------------------------

int cmd_validate(const Shared& opt) {
  const StationConfig cfg = station_config(opt);
  const DailySeries series = load_series(opt, cfg);
  const auto blocks = year_blocks(series, cfg);

  nlohmann::ordered_json doc;
  doc["station"] = series.station();
  doc["records"] = series.size();
  doc["first_date"] = format_iso_date(series.records().front().date);
  doc["last_date"] = format_iso_date(series.records().back().date);
  doc["years"] = blocks.size();
  long long wet = 0;
  for (const auto& b : blocks) wet += b.n_wet;
  doc["wet_days"] = wet;
  doc["missing_days"] = series.missing_days();
  doc["gaps"] = series.gaps().size();
  nlohmann::ordered_json intervals = nlohmann::ordered_json::array();
  for (const auto& [a, b] : cfg.intervals) {
    const DailySeries part = select_interval(series, a, b);
    intervals.push_back({{"start", a}, {"end", b}, {"records", part.size()}, {"years", year_blocks(part, cfg).size()}});
  }
  doc["intervals"] = intervals;
  emit(opt, doc.dump(2) + "\n");
  return kOk;
}

int cmd_fit_tail(const Shared& opt, int width, const std::string& method_name) {
  const StationConfig cfg = station_config(opt);
  const auto blocks = year_blocks(load_series(opt, cfg), cfg);
  const FitMethod method = fit_method_from_string(method_name);
  const int w = width > 0 ? width : static_cast<int>(blocks.size());
  const WindowPartition parts = window_partition(blocks, w);

  Table table{{"window", "first_year", "last_year", "n_wet", "n_tail", "C", "w", "converged", "objective"}, {}};
  for (const auto& win : parts.windows) {
    try {
      const FitReport fit = fit_block_tail(win, cfg.threshold_h0, method);
      table.rows.push_back({str(win.label), num(static_cast<long long>(win.first_year)),
                            num(static_cast<long long>(win.last_year)), num(static_cast<long long>(win.n_wet)),
                            num(static_cast<long long>(fit.n_points)), num(fit.tail().scale), num(fit.tail().shape),
                            flag(fit.converged), num(fit.objective)});
    } catch (const InsufficientData& e) {
      std::cerr << "window " << win.label << " skipped: " << e.what() << '\n';
    } catch (const DegenerateFit& e) {
      std::cerr << "window " << win.label << " skipped: " << e.what() << '\n';
    }
  }
  for (const auto& b : parts.dropped) std::cerr << "block " << b.label << " dropped (partial window)\n";
  if (table.rows.empty()) throw InsufficientData("no window could be fitted");
  emit(opt, table.render(output_format(opt)));
  return kOk;
}

int cmd_fit_gev(const Shared& opt, const std::string& dist) {
  const StationConfig cfg = station_config(opt);
  const auto blocks = year_blocks(load_series(opt, cfg), cfg);
  std::vector<double> maxima;
  for (const auto& b : blocks)
    if (b.annual_max) maxima.push_back(*b.annual_max);
  if (dist != "gev" && dist != "gumbel") throw ValidationError("--dist must be gev or gumbel");
  const FitReport fit = dist == "gev" ? fit_gev(maxima) : fit_gumbel(maxima);
  Table table{{"distribution", "location", "scale", "shape", "n", "converged", "loglik"}, {}};
  table.rows.push_back({str(dist), num(fit.gev().location), num(fit.gev().scale), num(fit.gev().shape),
                        num(static_cast<long long>(maxima.size())), flag(fit.converged),
                        num(gev_loglik(maxima, fit.gev()))});
  emit(opt, table.render(output_format(opt)));
  return kOk;
}

MevModel mev_model(const Shared& opt, const std::string& model_path, int width, const std::string& method_name) {
  if (!model_path.empty()) return mev_model_from_json(read_json_file(model_path));
  const StationConfig cfg = station_config(opt);
  const auto blocks = year_blocks(load_series(opt, cfg), cfg);
  const MevBuild build = build_mev_model(blocks, width, fit_method_from_string(method_name), cfg.threshold_h0);
  for (const auto& ex : build.excluded) std::cerr << "window " << ex.label << " excluded: " << ex.reason << '\n';
  return build.model;
}

int cmd_mev_cdf(const Shared& opt, const std::string& model_path, int width, const std::string& method,
                const std::vector<double>& levels, int points, const std::string& save_model) {
  const MevModel model = mev_model(opt, model_path, width, method);
  if (!save_model.empty()) write_text_file(save_model, to_json(model).dump(2) + "\n");
  Eigen::ArrayXd y;
  if (!levels.empty()) {
    y = Eigen::Map<const Eigen::ArrayXd>(levels.data(), static_cast<Eigen::Index>(levels.size()));
  } else {
    if (points < 2) throw ValidationError("--points must be >= 2");
    const double lo = return_level(1.0 / 0.99, model);
    const double hi = return_level(1e4, model);
    y = Eigen::ArrayXd::LinSpaced(points, std::log(lo), std::log(hi)).exp();
  }
  emit(opt, render_gumbel_plot({make_gumbel_series("mev", y, mev_cdf(y, model))}, output_format(opt)));
  return kOk;
}

int cmd_return_level(const Shared& opt, const std::string& model_path, int width, const std::string& method,
                     const std::vector<double>& periods) {
  const MevModel model = mev_model(opt, model_path, width, method);
  Table table{{"return_period_years", "return_level_mm"}, {}};
  for (double t : periods) table.rows.push_back({num(t), num(return_level(t, model))});
  emit(opt, table.render(output_format(opt)));
  return kOk;
}

int cmd_simulate(const Shared& opt, int preset) {
  const ExperimentSpec spec = experiment_spec(opt, preset, std::nullopt);
  const auto years = generate_experiment(spec, RandomStream(spec.seed));
  // Synthetic calendar: year j is 1901 + j; wet days fill it from January 1
  // and the remaining days are dry, so the record has no gaps.
  std::ostringstream os;
  os << "date,amount\n";
  for (std::size_t j = 0; j < years.size(); ++j) {
    const std::chrono::year year{1901 + static_cast<int>(j)};
    const int days = year.is_leap() ? 366 : 365;
    if (years[j].size() > days)
      throw ValidationError("simulate: " + std::to_string(years[j].size()) + " wet days do not fit in one year");
    const std::chrono::sys_days first{year / std::chrono::January / 1};
    for (int d = 0; d < days; ++d)
      os << format_iso_date(std::chrono::year_month_day{first + std::chrono::days{d}}) << ','
         << (d < years[j].size() ? format_number(years[j](d)) : std::string("0")) << '\n';
  }
  emit(opt, os.str());
  return kOk;
}

int cmd_compare(const Shared& opt, int preset, std::optional<std::size_t> truth_maxima) {
  const ExperimentSpec spec = experiment_spec(opt, preset, truth_maxima);
  const Comparison cmp = compare_estimators(spec);
  Eigen::ArrayXd truth(cmp.y_grid.size());
  for (Eigen::Index i = 0; i < truth.size(); ++i) truth(i) = cmp.truth.cdf(cmp.y_grid(i));
  std::cerr << "replicates used " << cmp.used_replicates << ", dropped " << cmp.dropped_replicates << '\n';
  emit(opt, render_gumbel_plot({make_gumbel_series("truth", cmp.y_grid, truth), cmp.mev_series, cmp.gev_series,
                                cmp.gumbel_series},
                               output_format(opt)));
  return kOk;
}

int cmd_homogeneity(const Shared& opt) {
  const StationConfig cfg = station_config(opt);
  const DailySeries series = parse_daily_csv(cfg.input_path, cfg);
  std::vector<std::pair<int, int>> intervals = cfg.intervals;
  if (!opt.interval.empty()) intervals = {parse_interval(opt.interval)};
  if (intervals.empty()) intervals = {{series.first_year(), series.last_year()}};

  EnvelopeOptions eo;
  eo.threshold = cfg.threshold_h0;
  eo.threads = opt.threads;
  for (const auto& [a, b] : intervals) {
    const auto blocks = year_blocks(select_interval(series, a, b), cfg);
    // Each interval gets its own stream so adding intervals leaves the others unchanged.
    const RandomStream rng = RandomStream(cfg.seed).substream(static_cast<std::uint64_t>(a) << 16 | (b & 0xFFFF));
    const EnvelopeResult result = envelope_test(blocks, cfg.widths, cfg.replicates, rng, eo);
    const std::string tag = std::to_string(a) + "-" + std::to_string(b);
    if (opt.out.empty()) {
      std::cout << "{\"interval\":\"" << tag << "\",\"summary\":" << render_envelope_summary(result) << "}\n";
      continue;
    }
    const std::string stem = intervals.size() == 1 ? opt.out : opt.out + "_" + tag;
    export_envelope(result, stem + ".csv", stem + ".json");
  }
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Metastatistical extreme value (MEV) analysis of daily rainfall records"};
  app.require_subcommand(1);
  Shared opt;
  app.add_option("--config", opt.config, "JSON config: station config, or experiment spec for simulate/compare");
  app.add_option("--input", opt.input, "daily CSV (date,amount columns; see config for names)");
  app.add_option("--seed", opt.seed, "base random seed");
  app.add_option("--threshold", opt.threshold, "tail threshold h0 in mm (default 10)");
  app.add_option("--reps", opt.reps, "Monte Carlo replicates");
  app.add_option("--widths", opt.widths, "window widths in years, e.g. --widths 10 5 2 1")->delimiter(',');
  app.add_option("--out", opt.out, "output file (stdout when omitted); homogeneity writes OUT.csv and OUT.json");
  app.add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", opt.threads, "worker threads, 0 = all cores; results do not depend on it");
  app.add_option("--interval", opt.interval, "restrict to years START-END");

  int tail_width = 0;
  int width = 1;
  int preset = 1;
  int points = 200;
  std::string method = "ls";
  std::string dist = "gev";
  std::string model_path;
  std::string save_model;
  std::vector<double> levels;
  std::vector<double> periods{10, 100, 1000};
  std::optional<std::size_t> truth_maxima;

  auto* validate = app.add_subcommand("validate", "parse and check a daily series, print a JSON summary");
  auto* fit_tail = app.add_subcommand("fit-tail", "Weibull tail fits per window (default: whole record)");
  fit_tail->add_option("--width", tail_width, "window width in years, 0 = whole record")->default_val(0);
  fit_tail->add_option("--method", method, "ls or mle")->default_val("ls");
  auto* fit_gev_cmd = app.add_subcommand("fit-gev", "GEV or Gumbel maximum likelihood on annual maxima");
  fit_gev_cmd->add_option("--dist", dist, "gev or gumbel")->default_val("gev");
  auto* mev_cdf_cmd = app.add_subcommand("mev-cdf", "MEV CDF as Gumbel-plot data");
  auto* rl = app.add_subcommand("return-level", "MEV return levels");
  for (auto* sub : {mev_cdf_cmd, rl}) {
    sub->add_option("--model", model_path, "MEV model JSON instead of fitting --input");
    sub->add_option("--width", width, "years per tail fit")->default_val(1);
    sub->add_option("--method", method, "ls or mle")->default_val("ls");
  }
  mev_cdf_cmd->add_option("--y", levels, "levels in mm, comma separated (default: log grid)")->delimiter(',');
  mev_cdf_cmd->add_option("--points", points, "grid size when --y is absent")->default_val(200);
  mev_cdf_cmd->add_option("--save-model", save_model, "write the fitted model as JSON");
  rl->add_option("--periods", periods, "return periods in years")->delimiter(',');
  auto* simulate = app.add_subcommand("simulate", "synthetic daily series of an experiment, as CSV");
  auto* compare = app.add_subcommand("compare", "replicated MEV / GEV / Gumbel medians against truth");
  for (auto* sub : {simulate, compare})
    sub->add_option("--experiment", preset, "preset 1, 2 or 3 when --config is absent")->default_val(1);
  compare->add_option("--truth-maxima", truth_maxima, "maxima in the truth curve (default 10^6)");
  auto* homogeneity = app.add_subcommand("homogeneity", "Monte Carlo envelope test per analysis interval");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  if (*validate) return cmd_validate(opt);
  if (*fit_tail) return cmd_fit_tail(opt, tail_width, method);
  if (*fit_gev_cmd) return cmd_fit_gev(opt, dist);
  if (*mev_cdf_cmd) return cmd_mev_cdf(opt, model_path, width, method, levels, points, save_model);
  if (*rl) return cmd_return_level(opt, model_path, width, method, periods);
  if (*simulate) return cmd_simulate(opt, preset);
  if (*compare) return cmd_compare(opt, preset, truth_maxima);
  if (*homogeneity) return cmd_homogeneity(opt);
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mev::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const mev::NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const mev::DegenerateFit& e) {
    std::cerr << "degenerate fit: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const mev::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const mev::InsufficientData& e) {
    std::cerr << "insufficient data: " << e.what() << '\n';
    return kInvalid;
  } catch (const mev::DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
