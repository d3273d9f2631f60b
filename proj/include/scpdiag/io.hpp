#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scpdiag/common.hpp"
#include "scpdiag/eval.hpp"
#include "scpdiag/lur.hpp"
#include "scpdiag/scp.hpp"
#include "scpdiag/spectral.hpp"

// Ingestion of ETT-style CSV datasets and prediction dumps, instance
// windowing, and report serialization. JSON reports carry a schema_version
// and round-trip through the readers below; CSV exports format floating
// point with 17 significant digits.

namespace scpdiag {

inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// datasets

struct CsvSchema {
  std::string timestamp_column = "date";
  std::vector<std::string> value_columns;  // empty: every other column
};

struct ChannelStandardization {
  double mean = 0.0;
  double stddev = 1.0;
};

struct DatasetTable {
  std::vector<std::string> timestamps;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // column-major, one vector per channel
  std::optional<std::vector<ChannelStandardization>> standardization;

  std::size_t row_count() const { return timestamps.size(); }
  std::size_t channel_count() const { return channels.size(); }

  std::size_t channel_index(const std::string& name) const {
    for (std::size_t c = 0; c < channel_names.size(); ++c)
      if (channel_names[c] == name) return c;
    throw DataError("dataset: no channel named '" + name + "'");
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_cell(const std::string& cell, std::size_t line_no,
                                const std::string& column) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end)
    throw DataError("csv: non-numeric cell at line " + std::to_string(line_no) +
                    ", column '" + column + "'");
  if (!std::isfinite(value))
    throw DataError("csv: non-finite value at line " + std::to_string(line_no) +
                    ", column '" + column + "'");
  return value;
}

}  // namespace detail

/// Loads an ETT-style CSV: one timestamp column plus named numeric channels.
/// Parse failures name the offending line and column.
inline DatasetTable load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: '" + path.string() + "' is empty");
  const auto header = detail::split_csv_line(line);

  std::size_t ts_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == schema.timestamp_column) ts_col = i;
  if (ts_col == header.size())
    throw DataError("csv: timestamp column '" + schema.timestamp_column + "' not found");

  std::vector<std::size_t> value_cols;
  if (schema.value_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (i != ts_col) value_cols.push_back(i);
  } else {
    for (const auto& name : schema.value_columns) {
      bool found = false;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
          value_cols.push_back(i);
          found = true;
          break;
        }
      }
      if (!found) throw DataError("csv: value column '" + name + "' not found");
    }
  }
  if (value_cols.empty()) throw DataError("csv: no value columns in '" + path.string() + "'");

  DatasetTable table;
  for (std::size_t i : value_cols) table.channel_names.push_back(header[i]);
  table.channels.resize(value_cols.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    table.timestamps.push_back(fields[ts_col]);
    for (std::size_t c = 0; c < value_cols.size(); ++c)
      table.channels[c].push_back(
          detail::parse_double_cell(fields[value_cols[c]], line_no, header[value_cols[c]]));
  }
  if (table.row_count() == 0) throw DataError("csv: '" + path.string() + "' has no data rows");
  return table;
}

struct SplitFractions {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  void validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0 ||
        std::abs(train + val + test - 1.0) > 1e-9)
      throw ConfigError("split fractions must be nonnegative and sum to 1");
  }
};

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    default: return "test";
  }
}

namespace detail {

inline std::pair<std::size_t, std::size_t> split_rows(std::size_t n,
                                                      const SplitFractions& fractions,
                                                      Split split) {
  fractions.validate();
  const auto n_train = static_cast<std::size_t>(fractions.train * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(fractions.val * static_cast<double>(n));
  switch (split) {
    case Split::train: return {0, n_train};
    case Split::val: return {n_train, n_train + n_val};
    default: return {n_train + n_val, n};
  }
}

}  // namespace detail

/// Z-scores every channel in place using statistics of the train split and
/// records them in the table.
inline void standardize(DatasetTable& table, const SplitFractions& fractions) {
  const auto [a, b] = detail::split_rows(table.row_count(), fractions, Split::train);
  if (b <= a) throw DataError("standardize: empty train split");
  std::vector<ChannelStandardization> stats;
  for (std::size_t c = 0; c < table.channel_count(); ++c) {
    auto& col = table.channels[c];
    const std::span<const double> train(col.data() + a, b - a);
    const double m = mean(train);
    const double sd = std::sqrt(sample_variance(train));
    if (!(sd > 0.0))
      throw DataError("standardize: channel '" + table.channel_names[c] +
                      "' is constant on the train split");
    for (double& v : col) v = (v - m) / sd;
    stats.push_back({m, sd});
  }
  table.standardization = stats;
}

/// Contiguous (history, future) windows of one channel within the chosen
/// split; the trailing partial stretch simply yields no further window (no
/// batch is dropped). Pair count is floor((len - 2N) / stride) + 1.
inline std::vector<SegmentPair> windowize(const DatasetTable& table, std::size_t channel,
                                          std::size_t history, std::size_t horizon,
                                          std::size_t stride, const SplitFractions& fractions,
                                          Split split) {
  if (channel >= table.channel_count()) throw DataError("windowize: channel out of range");
  if (history == 0 || horizon == 0) throw ConfigError("windowize: zero window length");
  if (history != horizon)
    throw ConfigError("windowize: history and horizon must be equal in this protocol");
  if (stride == 0) throw ConfigError("windowize: stride must be positive");
  const auto [a, b] = detail::split_rows(table.row_count(), fractions, split);
  const std::size_t len = b - a;
  const std::size_t need = history + horizon;
  if (len < need)
    throw DataError("windowize: split '" + std::string(to_string(split)) + "' has " +
                    std::to_string(len) + " rows, needs at least " + std::to_string(need));
  const std::size_t count = (len - need) / stride + 1;
  const auto& col = table.channels[channel];
  std::vector<SegmentPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = a + i * stride;
    SegmentPair pair;
    pair.history.assign(col.begin() + start, col.begin() + start + history);
    pair.future.assign(col.begin() + start + history, col.begin() + start + need);
    pair.channel_id = table.channel_names[channel];
    pair.index = static_cast<std::int64_t>(i);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// prediction dumps

/// model -> (channel, instance index) -> forecast
using PredictionMap =
    std::map<std::string, std::map<std::pair<std::string, std::int64_t>, std::vector<double>>>;

/// Reads a prediction dump CSV with header model_id,channel,index,step,value.
/// Every forecast must cover steps 0..horizon-1 exactly once.
inline PredictionMap load_predictions(const std::filesystem::path& path, std::size_t horizon) {
  std::ifstream in(path);
  if (!in) throw DataError("predictions: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("predictions: '" + path.string() + "' is empty");
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> expected{"model_id", "channel", "index", "step", "value"};
  if (std::vector<std::string>(header.begin(), header.end()) != expected)
    throw DataError("predictions: expected header model_id,channel,index,step,value");

  PredictionMap map;
  std::map<std::pair<std::string, std::string>, std::map<std::int64_t, std::size_t>> filled;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 5)
      throw DataError("predictions: line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected 5");
    const std::string& model = fields[0];
    const std::string& channel = fields[1];
    const auto index =
        static_cast<std::int64_t>(detail::parse_double_cell(fields[2], line_no, "index"));
    const auto step =
        static_cast<std::size_t>(detail::parse_double_cell(fields[3], line_no, "step"));
    const double value = detail::parse_double_cell(fields[4], line_no, "value");
    if (step >= horizon)
      throw DataError("predictions: step " + std::to_string(step) + " at line " +
                      std::to_string(line_no) + " exceeds horizon " + std::to_string(horizon));
    auto& forecast = map[model][{channel, index}];
    if (forecast.empty()) forecast.assign(horizon, std::numeric_limits<double>::quiet_NaN());
    forecast[step] = value;
    filled[{model, channel}][index] += 1;
  }
  for (const auto& [model, per_key] : map) {
    for (const auto& [key, forecast] : per_key) {
      for (std::size_t s = 0; s < forecast.size(); ++s) {
        if (std::isnan(forecast[s]))
          throw DataError("predictions: model '" + model + "' channel '" + key.first +
                          "' index " + std::to_string(key.second) + " is missing step " +
                          std::to_string(s));
      }
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// JSON serialization

using json = nlohmann::json;

inline void to_json(json& j, const WelchConfig& cfg) {
  j = json{{"segment_length", cfg.segment_length},
           {"overlap", cfg.overlap},
           {"window", to_string(cfg.window)},
           {"epsilon", cfg.epsilon}};
}

inline void from_json(const json& j, WelchConfig& cfg) {
  cfg.segment_length = j.at("segment_length").get<std::size_t>();
  cfg.overlap = j.at("overlap").get<std::size_t>();
  cfg.window = j.at("window").get<std::string>() == "hann" ? Window::hann : Window::rectangular;
  cfg.epsilon = j.at("epsilon").get<double>();
}

inline void to_json(json& j, const PowerSpectrum& s) {
  j = json{{"frequencies", s.grid.frequencies}, {"power", s.power}};
}

inline void from_json(const json& j, PowerSpectrum& s) {
  s.grid.frequencies = j.at("frequencies").get<std::vector<double>>();
  s.power = j.at("power").get<std::vector<double>>();
}

inline void to_json(json& j, const Band& b) { j = json{{"lo", b.lo}, {"hi", b.hi}}; }

inline void from_json(const json& j, Band& b) {
  b.lo = j.at("lo").get<double>();
  b.hi = j.at("hi").get<double>();
}

namespace detail {

inline json optional_to_json(const std::optional<double>& v) {
  return v.has_value() ? json(*v) : json(nullptr);
}

inline std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline void to_json(json& j, const ScpReport& r) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "scp_report"},
           {"channel", r.channel_id},
           {"index", r.index},
           {"delta_sq", r.delta_sq},
           {"var_y", r.var_y},
           {"mse_lb", r.mse_lb},
           {"p_raw", r.p_raw},
           {"p", r.p},
           {"epsilon_used", r.epsilon_used},
           {"config", r.config},
           {"residual_spectrum", r.residual_spectrum}};
  if (r.restricted_to) j["restricted_to"] = *r.restricted_to;
  json bands = json::array();
  for (const auto& b : r.band_breakdown) {
    bands.push_back(json{{"label", b.label},
                         {"var_y", b.var_y},
                         {"mse_lb", b.mse_lb},
                         {"p", detail::optional_to_json(b.p)}});
  }
  j["bands"] = bands;
}

inline void from_json(const json& j, ScpReport& r) {
  r.channel_id = j.at("channel").get<std::string>();
  r.index = j.at("index").get<std::int64_t>();
  r.delta_sq = j.at("delta_sq").get<double>();
  r.var_y = j.at("var_y").get<double>();
  r.mse_lb = j.at("mse_lb").get<double>();
  r.p_raw = j.at("p_raw").get<double>();
  r.p = j.at("p").get<double>();
  r.epsilon_used = j.at("epsilon_used").get<double>();
  r.config = j.at("config").get<WelchConfig>();
  r.residual_spectrum = j.at("residual_spectrum").get<PowerSpectrum>();
  if (j.contains("restricted_to")) r.restricted_to = j.at("restricted_to").get<Band>();
  r.band_breakdown.clear();
  for (const auto& bj : j.at("bands")) {
    BandScp b;
    b.label = bj.at("label").get<std::string>();
    b.var_y = bj.at("var_y").get<double>();
    b.mse_lb = bj.at("mse_lb").get<double>();
    b.p = detail::optional_from_json(bj.at("p"));
    r.band_breakdown.push_back(std::move(b));
  }
}

inline void to_json(json& j, const LurReport& r) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "lur_report"},
           {"model_id", r.model_id},
           {"p_model", r.p_model},
           {"p_linear", r.p_linear},
           {"eta_linear", r.eta_linear},
           {"lur", detail::optional_to_json(r.lur)},
           {"var_y", r.var_y},
           {"epsilon_used", r.epsilon_used},
           {"config", r.config}};
  json bands = json::array();
  for (const auto& b : r.band_breakdown) {
    bands.push_back(json{{"label", b.label},
                         {"p_model", b.p_model},
                         {"p_linear", b.p_linear},
                         {"lur", detail::optional_to_json(b.lur)},
                         {"energy_share", b.energy_share}});
  }
  j["bands"] = bands;
}

inline void from_json(const json& j, LurReport& r) {
  r.model_id = j.at("model_id").get<std::string>();
  r.p_model = j.at("p_model").get<double>();
  r.p_linear = j.at("p_linear").get<double>();
  r.eta_linear = j.at("eta_linear").get<double>();
  r.lur = detail::optional_from_json(j.at("lur"));
  r.var_y = j.at("var_y").get<double>();
  r.epsilon_used = j.at("epsilon_used").get<double>();
  r.config = j.at("config").get<WelchConfig>();
  r.band_breakdown.clear();
  for (const auto& bj : j.at("bands")) {
    BandLur b;
    b.label = bj.at("label").get<std::string>();
    b.p_model = bj.at("p_model").get<double>();
    b.p_linear = bj.at("p_linear").get<double>();
    b.lur = detail::optional_from_json(bj.at("lur"));
    b.energy_share = bj.at("energy_share").get<double>();
    r.band_breakdown.push_back(std::move(b));
  }
}

inline void to_json(json& j, const StratifiedReport& r) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "stratified_report"},
           {"bin_edges", r.bin_edges},
           {"min_count", r.min_count}};
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back(json{{"bin", c.bin},
                         {"model_id", c.model_id},
                         {"count", c.count},
                         {"mean_mse", std::isnan(c.mean_mse) ? json(nullptr) : json(c.mean_mse)},
                         {"below_min_count", c.below_min_count}});
  }
  j["cells"] = cells;
}

inline void from_json(const json& j, StratifiedReport& r) {
  r.bin_edges = j.at("bin_edges").get<std::vector<double>>();
  r.min_count = j.at("min_count").get<std::size_t>();
  r.cells.clear();
  for (const auto& cj : j.at("cells")) {
    StratifiedCell c;
    c.bin = cj.at("bin").get<std::size_t>();
    c.model_id = cj.at("model_id").get<std::string>();
    c.count = cj.at("count").get<std::size_t>();
    c.mean_mse = cj.at("mean_mse").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                             : cj.at("mean_mse").get<double>();
    c.below_min_count = cj.at("below_min_count").get<bool>();
    r.cells.push_back(std::move(c));
  }
}

inline void to_json(json& j, const DriftSeries& r) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "drift_series"},
           {"indices", r.indices},
           {"band_labels", r.band_labels},
           {"band_shares", r.band_shares},
           {"eta_linear", r.eta_linear},
           {"model_mse", r.model_mse}};
}

inline void from_json(const json& j, DriftSeries& r) {
  r.indices = j.at("indices").get<std::vector<std::int64_t>>();
  r.band_labels = j.at("band_labels").get<std::vector<std::string>>();
  r.band_shares = j.at("band_shares").get<std::vector<std::vector<double>>>();
  r.eta_linear = j.at("eta_linear").get<std::vector<double>>();
  r.model_mse = j.at("model_mse").get<std::map<std::string, std::vector<double>>>();
}

inline void to_json(json& j, const CorrelationReport& r) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "correlation_report"},
           {"scope", r.scope},
           {"pearson", r.pearson}};
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back(json{{"channel", p.channel_id},
                          {"mean_mse_lb", p.mean_mse_lb},
                          {"mean_mse", p.mean_mse}});
  }
  j["points"] = points;
}

inline void from_json(const json& j, CorrelationReport& r) {
  r.scope = j.at("scope").get<std::string>();
  r.pearson = j.at("pearson").get<std::map<std::string, double>>();
  r.points.clear();
  for (const auto& pj : j.at("points")) {
    CorrelationPoint p;
    p.channel_id = pj.at("channel").get<std::string>();
    p.mean_mse_lb = pj.at("mean_mse_lb").get<double>();
    p.mean_mse = pj.at("mean_mse").get<std::map<std::string, double>>();
    r.points.push_back(std::move(p));
  }
}

inline void to_json(json& j, const ToyStudyRow& r) {
  j = json{{"noise_level", r.noise_level},
           {"mean_model_mse", r.mean_model_mse},
           {"mean_mse_lb", r.mean_mse_lb},
           {"mean_p", r.mean_p}};
}

inline void from_json(const json& j, ToyStudyRow& r) {
  r.noise_level = j.at("noise_level").get<double>();
  r.mean_model_mse = j.at("mean_model_mse").get<double>();
  r.mean_mse_lb = j.at("mean_mse_lb").get<double>();
  r.mean_p = j.at("mean_p").get<double>();
}

inline void to_json(json& j, const ToyStudyTable& t) {
  j = json{{"schema_version", kReportSchemaVersion},
           {"type", "toy_study"},
           {"pair_length", t.pair_length},
           {"rows", t.rows}};
}

inline void from_json(const json& j, ToyStudyTable& t) {
  t.pair_length = j.at("pair_length").get<std::size_t>();
  t.rows = j.at("rows").get<std::vector<ToyStudyRow>>();
}

// ---------------------------------------------------------------------------
// report files

enum class ReportFormat { json, csv };

inline const char* to_string(ReportFormat f) { return f == ReportFormat::json ? "json" : "csv"; }

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("report: cannot write '" + path.string() + "'");
  return out;
}

template <typename Report>
void write_json_report(const Report& report, const std::filesystem::path& path,
                       const json* config_echo) {
  json j = report;
  if (config_echo) j["run_config"] = *config_echo;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline void write_config_comment(std::ofstream& out, const json* config_echo) {
  if (config_echo) out << "# config: " << config_echo->dump() << '\n';
}

}  // namespace detail

template <typename Report>
Report read_json_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("report: cannot open '" + path.string() + "'");
  json j = json::parse(in);
  return j.get<Report>();
}

inline void write_report(const ScpReport& r, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format != ReportFormat::json)
    throw ConfigError("write_report: ScpReport supports only JSON");
  detail::write_json_report(r, path, config_echo);
}

inline void write_report(const LurReport& r, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format != ReportFormat::json)
    throw ConfigError("write_report: LurReport supports only JSON");
  detail::write_json_report(r, path, config_echo);
}

inline void write_report(const StratifiedReport& r, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format == ReportFormat::json) {
    detail::write_json_report(r, path, config_echo);
    return;
  }
  auto out = detail::open_out(path);
  detail::write_config_comment(out, config_echo);
  out << "bin,lo,hi,model_id,count,mean_mse,below_min_count\n";
  for (const auto& c : r.cells) {
    out << c.bin << ',' << detail::fmt17(r.bin_edges[c.bin]) << ','
        << detail::fmt17(r.bin_edges[c.bin + 1]) << ',' << c.model_id << ',' << c.count << ','
        << (c.count > 0 ? detail::fmt17(c.mean_mse) : std::string()) << ','
        << (c.below_min_count ? 1 : 0) << '\n';
  }
}

inline void write_report(const DriftSeries& r, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format == ReportFormat::json) {
    detail::write_json_report(r, path, config_echo);
    return;
  }
  auto out = detail::open_out(path);
  detail::write_config_comment(out, config_echo);
  out << "index";
  for (const auto& label : r.band_labels) out << ",share_" << label;
  out << ",eta_linear";
  for (const auto& [model, _] : r.model_mse) out << ",mse_" << model;
  out << '\n';
  for (std::size_t i = 0; i < r.indices.size(); ++i) {
    out << r.indices[i];
    for (double s : r.band_shares[i]) out << ',' << detail::fmt17(s);
    out << ',' << detail::fmt17(r.eta_linear[i]);
    for (const auto& [_, mses] : r.model_mse) out << ',' << detail::fmt17(mses[i]);
    out << '\n';
  }
}

inline void write_report(const CorrelationReport& r, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format == ReportFormat::json) {
    detail::write_json_report(r, path, config_echo);
    return;
  }
  auto out = detail::open_out(path);
  detail::write_config_comment(out, config_echo);
  for (const auto& [model, rho] : r.pearson)
    out << "# pearson_r " << model << " " << detail::fmt17(rho) << '\n';
  out << "channel,model_id,mean_mse_lb,mean_model_mse\n";
  for (const auto& p : r.points)
    for (const auto& [model, mse] : p.mean_mse)
      out << p.channel_id << ',' << model << ',' << detail::fmt17(p.mean_mse_lb) << ','
          << detail::fmt17(mse) << '\n';
}

inline void write_report(const ToyStudyTable& t, ReportFormat format,
                         const std::filesystem::path& path, const json* config_echo = nullptr) {
  if (format == ReportFormat::json) {
    detail::write_json_report(t, path, config_echo);
    return;
  }
  auto out = detail::open_out(path);
  detail::write_config_comment(out, config_echo);
  out << "noise_level,mean_model_mse,mean_mse_lb,mean_p\n";
  for (const auto& row : t.rows)
    out << detail::fmt17(row.noise_level) << ',' << detail::fmt17(row.mean_model_mse) << ','
        << detail::fmt17(row.mean_mse_lb) << ',' << detail::fmt17(row.mean_p) << '\n';
}

/// Writes numeric series as a dataset-style CSV with a synthetic integer
/// timestamp column.
inline void write_series_csv(const std::filesystem::path& path,
                             std::span<const std::string> names,
                             std::span<const std::vector<double>> columns) {
  if (names.size() != columns.size())
    throw ShapeError("write_series_csv: name/column count mismatch");
  if (columns.empty()) throw DataError("write_series_csv: no columns");
  auto out = detail::open_out(path);
  out << "date";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < columns[0].size(); ++r) {
    out << r;
    for (const auto& col : columns) out << ',' << detail::fmt17(col[r]);
    out << '\n';
  }
}

/// Writes FIR coefficients as lag,coefficient rows.
inline void write_fir_csv(const std::filesystem::path& path, const FirFilter& filter) {
  auto out = detail::open_out(path);
  out << "lag,coefficient\n";
  for (std::size_t k = 0; k < filter.coefficients.size(); ++k)
    out << (k + 1) << ',' << detail::fmt17(filter.coefficients[k]) << '\n';
}

}  // namespace scpdiag
