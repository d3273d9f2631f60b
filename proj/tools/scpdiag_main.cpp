// scpdiag: batch CLI for spectral predictability and utilization diagnostics.
//
// Subcommands: scp, lur, bands, toy, drift, stratify, correlate. Every run is
// deterministic given its flags and seed; progress goes to stderr, data goes
// to files under --out. Exit codes: 0 success, 1 usage or configuration
// error, 2 data error, 3 numeric failure in every instance.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "scpdiag/scpdiag.hpp"

namespace fs = std::filesystem;
using scpdiag::json;

namespace {

// ---------------------------------------------------------------------------
// shared option bundles

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 87;  // reference seed; the default toy table is checked in CI
  std::size_t threads = 1;
  std::string out_dir = ".";
  std::string format = "json";

  scpdiag::ReportFormat report_format() const {
    if (format == "json") return scpdiag::ReportFormat::json;
    if (format == "csv") return scpdiag::ReportFormat::csv;
    throw scpdiag::ConfigError("--format must be json or csv");
  }
};

struct WelchOpts {
  std::size_t segment_length = 0;  // 0: floor(0.25 N)
  std::size_t overlap = 0;         // used only when explicitly set
  bool overlap_set = false;
  std::string window = "hann";
  double epsilon = 0.0;  // <= 0: relative floor rule

  scpdiag::WelchConfig resolve(std::size_t n) const {
    scpdiag::WelchConfig cfg;
    cfg.segment_length = segment_length > 0 ? segment_length : n / 4;
    cfg.overlap = overlap_set ? overlap : cfg.segment_length / 2;
    if (window == "hann") {
      cfg.window = scpdiag::Window::hann;
    } else if (window == "rectangular" || window == "rect") {
      cfg.window = scpdiag::Window::rectangular;
    } else {
      throw scpdiag::ConfigError("--window must be hann or rectangular");
    }
    cfg.epsilon = epsilon;
    return cfg;
  }
};

struct BandOpts {
  std::size_t bands = 8;
  bool thirds = false;
  std::string edges;  // comma-separated normalized frequencies

  scpdiag::BandPartition resolve() const {
    if (!edges.empty()) {
      std::vector<double> e;
      std::string token;
      std::stringstream ss(edges);
      while (std::getline(ss, token, ',')) {
        try {
          e.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw scpdiag::ConfigError("--band-edges: cannot parse '" + token + "'");
        }
      }
      return scpdiag::make_partition(scpdiag::PartitionScheme::custom, 0, e);
    }
    if (thirds) return scpdiag::make_partition(scpdiag::PartitionScheme::thirds, 3);
    return scpdiag::make_partition(scpdiag::PartitionScheme::equal_width, bands);
  }
};

struct DataOpts {
  std::string data_path;
  std::size_t horizon = 96;
  std::size_t stride = 1;
  std::string split = "test";
  bool do_standardize = false;
  double train_frac = 0.7;
  double val_frac = 0.1;
  double test_frac = 0.2;

  scpdiag::SplitFractions fractions() const { return {train_frac, val_frac, test_frac}; }

  scpdiag::Split split_enum() const {
    if (split == "train") return scpdiag::Split::train;
    if (split == "val") return scpdiag::Split::val;
    if (split == "test") return scpdiag::Split::test;
    throw scpdiag::ConfigError("--split must be train, val or test");
  }

  scpdiag::DatasetTable load() const {
    auto table = scpdiag::load_csv(data_path);
    if (do_standardize) scpdiag::standardize(table, fractions());
    return table;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; explicit flags win");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "instance-level worker threads");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

void add_welch(CLI::App* cmd, WelchOpts& o) {
  cmd->add_option("--segment-length", o.segment_length,
                  "Welch segment length (0: floor(0.25 N))");
  cmd->add_option("--overlap", o.overlap, "Welch overlap (default: half the segment)")
      ->each([&o](const std::string&) { o.overlap_set = true; });
  cmd->add_option("--window", o.window, "hann or rectangular");
  cmd->add_option("--epsilon", o.epsilon, "coherence stability floor (<=0: relative rule)");
}

void add_bands(CLI::App* cmd, BandOpts& o) {
  cmd->add_option("--bands", o.bands, "equal-width band count");
  cmd->add_flag("--thirds", o.thirds, "use the low/mid/high partition");
  cmd->add_option("--band-edges", o.edges, "custom edges, e.g. 0,0.1,0.3,0.5");
}

void add_data(CLI::App* cmd, DataOpts& o, bool required = true) {
  auto* opt = cmd->add_option("--data", o.data_path, "dataset CSV (ETT-style)");
  if (required) opt->required();
  cmd->add_option("--horizon", o.horizon, "history and forecast length N");
  cmd->add_option("--stride", o.stride, "window stride");
  cmd->add_option("--split", o.split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}));
  cmd->add_flag("--standardize", o.do_standardize, "z-score channels with train statistics");
  cmd->add_option("--train-frac", o.train_frac, "train fraction");
  cmd->add_option("--val-frac", o.val_frac, "validation fraction");
  cmd->add_option("--test-frac", o.test_frac, "test fraction");
}

// Values from --config fill in flags the user did not pass explicitly.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw scpdiag::ConfigError("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw scpdiag::ConfigError(std::string("config file parse failure: ") + e.what());
  }
  for (auto& [key, value] : cfg.items()) {
    auto* opt = cmd->get_option_no_throw("--" + key);
    if (!opt) throw scpdiag::ConfigError("config file: unknown option '" + key + "'");
    if (opt->count() > 0) continue;  // explicit flag wins
    if (value.is_boolean()) {
      if (value.get<bool>()) opt->add_result("true");
    } else if (value.is_string()) {
      opt->add_result(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      opt->add_result(joined);
    } else {
      opt->add_result(value.dump());
    }
    opt->run_callback();
  }
}

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string fmt(double v) { return scpdiag::detail::fmt17(v); }

void log_line(const std::string& msg) { std::cerr << "scpdiag: " << msg << '\n'; }

fs::path prepare_out(const CommonOpts& common) {
  fs::path dir(common.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  return dir;
}

json welch_echo(const scpdiag::WelchConfig& cfg) {
  return json{{"segment_length", cfg.segment_length},
              {"overlap", cfg.overlap},
              {"window", scpdiag::to_string(cfg.window)},
              {"epsilon", cfg.epsilon}};
}

json partition_echo(const scpdiag::BandPartition& partition) {
  json bands = json::array();
  for (std::size_t b = 0; b < partition.size(); ++b)
    bands.push_back(json{{"label", partition.labels[b]},
                         {"lo", partition.bands[b].lo},
                         {"hi", partition.bands[b].hi}});
  return json{{"scheme", scpdiag::to_string(partition.scheme)}, {"bands", bands}};
}

// ---------------------------------------------------------------------------
// records files shared by stratify and correlate

std::vector<scpdiag::InstanceRecord> load_records_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw scpdiag::DataError("records: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw scpdiag::DataError("records: empty file");
  if (line != "channel,index,p,mse_lb,var_y,model_id,mse")
    throw scpdiag::DataError(
        "records: expected header channel,index,p,mse_lb,var_y,model_id,mse");
  std::map<std::pair<std::string, std::int64_t>, scpdiag::InstanceRecord> acc;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = scpdiag::detail::split_csv_line(line);
    if (f.size() != 7)
      throw scpdiag::DataError("records: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields, expected 7");
    const std::int64_t index = std::stoll(f[1]);
    auto& rec = acc[{f[0], index}];
    rec.channel_id = f[0];
    rec.index = index;
    rec.p = scpdiag::detail::parse_double_cell(f[2], line_no, "p");
    rec.mse_lb = scpdiag::detail::parse_double_cell(f[3], line_no, "mse_lb");
    rec.var_y = scpdiag::detail::parse_double_cell(f[4], line_no, "var_y");
    rec.model_mse[f[5]] = scpdiag::detail::parse_double_cell(f[6], line_no, "mse");
  }
  std::vector<scpdiag::InstanceRecord> records;
  records.reserve(acc.size());
  for (auto& [_, rec] : acc) records.push_back(std::move(rec));
  if (records.empty()) throw scpdiag::DataError("records: no rows");
  return records;
}

// End-to-end records: windowize every channel, score instances with SCP and
// attach realized model MSE from the prediction dump.
std::vector<scpdiag::InstanceRecord> build_records(const DataOpts& data, const WelchOpts& welch,
                                                   const std::string& predictions_path,
                                                   std::size_t threads) {
  const auto table = data.load();
  const auto cfg = welch.resolve(data.horizon);
  const auto fractions = data.fractions();
  const auto split = data.split_enum();

  std::vector<scpdiag::SegmentPair> pairs;
  for (std::size_t c = 0; c < table.channel_count(); ++c) {
    auto chan = scpdiag::windowize(table, c, data.horizon, data.horizon, data.stride,
                                   fractions, split);
    pairs.insert(pairs.end(), std::make_move_iterator(chan.begin()),
                 std::make_move_iterator(chan.end()));
  }
  if (pairs.empty()) throw scpdiag::DataError("no instances after windowing");

  scpdiag::PredictionMap preds;
  if (!predictions_path.empty()) {
    preds = scpdiag::load_predictions(predictions_path, data.horizon);
    std::map<std::pair<std::string, std::int64_t>, std::size_t> index_of;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      index_of[{pairs[i].channel_id, pairs[i].index}] = i;
    for (const auto& [model, per_key] : preds) {
      for (const auto& [key, unused] : per_key) {
        (void)unused;
        if (!index_of.count(key))
          throw scpdiag::DataError("predictions for model '" + model +
                                   "' reference unknown instance (" + key.first + ", " +
                                   std::to_string(key.second) + ")");
      }
    }
  }

  std::vector<std::optional<scpdiag::InstanceRecord>> slots(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    try {
      const auto report = scpdiag::compute_scp(pairs[i], cfg);
      scpdiag::InstanceRecord rec;
      rec.channel_id = pairs[i].channel_id;
      rec.index = pairs[i].index;
      rec.p = report.p;
      rec.mse_lb = report.mse_lb;
      rec.var_y = report.var_y;
      slots[i] = std::move(rec);
    } catch (const scpdiag::Error&) {
      slots[i] = std::nullopt;
    }
  });

  std::vector<scpdiag::InstanceRecord> records;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!slots[i]) continue;
    auto rec = std::move(*slots[i]);
    for (const auto& [model, per_key] : preds) {
      const auto it = per_key.find({rec.channel_id, rec.index});
      if (it == per_key.end()) continue;
      double mse = 0.0;
      const auto& f = it->second;
      for (std::size_t t = 0; t < f.size(); ++t) {
        const double d = f[t] - pairs[i].future[t];
        mse += d * d;
      }
      rec.model_mse[model] = mse / static_cast<double>(f.size());
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw scpdiag::NumericError("every instance failed");
  return records;
}

// ---------------------------------------------------------------------------
// scp

int cmd_scp(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
            const BandOpts& bands, int band_index) {
  const auto table = data.load();
  const auto cfg = welch.resolve(data.horizon);
  const auto partition = bands.resolve();
  if (band_index >= 0 && static_cast<std::size_t>(band_index) >= partition.size())
    throw scpdiag::ConfigError("--band index outside the partition");

  std::vector<scpdiag::SegmentPair> pairs;
  for (std::size_t c = 0; c < table.channel_count(); ++c) {
    auto chan = scpdiag::windowize(table, c, data.horizon, data.horizon, data.stride,
                                   data.fractions(), data.split_enum());
    pairs.insert(pairs.end(), std::make_move_iterator(chan.begin()),
                 std::make_move_iterator(chan.end()));
  }
  log_line(std::to_string(pairs.size()) + " instances across " +
           std::to_string(table.channel_count()) + " channels");

  std::vector<scpdiag::ScpBatchEntry> entries(pairs.size());
  parallel_for(pairs.size(), common.threads, [&](std::size_t i) {
    try {
      if (band_index >= 0) {
        entries[i].report = scpdiag::compute_scp(
            pairs[i], cfg, partition.bands[static_cast<std::size_t>(band_index)]);
      } else {
        entries[i].report = scpdiag::compute_scp(pairs[i], cfg, partition);
      }
    } catch (const scpdiag::Error& e) {
      entries[i].error = e.what();
    }
  });

  const auto out_dir = prepare_out(common);
  json config_echo{{"command", "scp"},
                   {"data", data.data_path},
                   {"horizon", data.horizon},
                   {"stride", data.stride},
                   {"split", data.split},
                   {"standardize", data.do_standardize},
                   {"welch", welch_echo(cfg)},
                   {"partition", partition_echo(partition)},
                   {"band", band_index},
                   {"seed", common.seed},
                   {"threads", common.threads}};

  // per-instance stream
  {
    std::ofstream out(out_dir / "scp_instances.csv");
    out << "# config: " << config_echo.dump() << '\n';
    out << "channel,index,var_y,delta_sq,mse_lb,p_raw,p,error\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      out << pairs[i].channel_id << ',' << pairs[i].index << ',';
      if (e.ok()) {
        const auto& r = *e.report;
        out << fmt(r.var_y) << ',' << fmt(r.delta_sq) << ',' << fmt(r.mse_lb) << ','
            << fmt(r.p_raw) << ',' << fmt(r.p) << ",\n";
      } else {
        std::string msg = e.error;
        for (char& ch : msg)
          if (ch == ',') ch = ';';
        out << ",,,,," << msg << '\n';
      }
    }
  }

  // aggregates
  struct Acc {
    double mse_lb = 0.0, p = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> per_channel;
  Acc total;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].ok()) {
      ++failed;
      log_line("instance (" + pairs[i].channel_id + ", " + std::to_string(pairs[i].index) +
               ") failed: " + entries[i].error);
      continue;
    }
    const auto& r = *entries[i].report;
    auto& acc = per_channel[pairs[i].channel_id];
    acc.mse_lb += r.mse_lb;
    acc.p += r.p;
    acc.count += 1;
    total.mse_lb += r.mse_lb;
    total.p += r.p;
    total.count += 1;
  }
  if (total.count == 0) throw scpdiag::NumericError("every instance failed");

  json channels = json::array();
  for (const auto& [name, acc] : per_channel) {
    channels.push_back(json{{"channel", name},
                            {"count", acc.count},
                            {"mean_mse_lb", acc.mse_lb / static_cast<double>(acc.count)},
                            {"mean_p", acc.p / static_cast<double>(acc.count)}});
  }
  json summary{{"schema_version", scpdiag::kReportSchemaVersion},
               {"type", "scp_summary"},
               {"instances", total.count},
               {"instances_failed", failed},
               {"dataset_mean_mse_lb", total.mse_lb / static_cast<double>(total.count)},
               {"dataset_mean_p", total.p / static_cast<double>(total.count)},
               {"per_channel", channels},
               {"run_config", config_echo}};
  if (band_index >= 0)
    summary["restricted_to_band"] = partition.labels[static_cast<std::size_t>(band_index)];

  if (common.report_format() == scpdiag::ReportFormat::json) {
    std::ofstream out(out_dir / "scp_summary.json");
    out << summary.dump(2) << '\n';
    log_line("wrote " + (out_dir / "scp_summary.json").string());
  } else {
    std::ofstream out(out_dir / "scp_summary.csv");
    out << "# config: " << config_echo.dump() << '\n';
    out << "channel,count,mean_mse_lb,mean_p\n";
    for (const auto& [name, acc] : per_channel)
      out << name << ',' << acc.count << ','
          << fmt(acc.mse_lb / static_cast<double>(acc.count)) << ','
          << fmt(acc.p / static_cast<double>(acc.count)) << '\n';
    out << "ALL," << total.count << ',' << fmt(total.mse_lb / static_cast<double>(total.count))
        << ',' << fmt(total.p / static_cast<double>(total.count)) << '\n';
    log_line("wrote " + (out_dir / "scp_summary.csv").string());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// lur

int cmd_lur(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
            const BandOpts& bands, const std::string& predictions_path) {
  const auto table = data.load();
  const auto cfg = welch.resolve(data.horizon);
  const auto partition = bands.resolve();
  const auto preds = scpdiag::load_predictions(predictions_path, data.horizon);
  if (preds.empty()) throw scpdiag::DataError("prediction dump is empty");

  std::map<std::pair<std::string, std::int64_t>, const scpdiag::SegmentPair*> instance_of;
  std::vector<std::vector<scpdiag::SegmentPair>> channels;
  channels.reserve(table.channel_count());
  for (std::size_t c = 0; c < table.channel_count(); ++c) {
    channels.push_back(scpdiag::windowize(table, c, data.horizon, data.horizon, data.stride,
                                          data.fractions(), data.split_enum()));
    for (const auto& p : channels.back()) instance_of[{p.channel_id, p.index}] = &p;
  }

  struct Job {
    std::string model;
    const scpdiag::SegmentPair* pair;
    const std::vector<double>* forecast;
  };
  std::vector<Job> jobs;
  for (const auto& [model, per_key] : preds) {
    for (const auto& [key, forecast] : per_key) {
      const auto it = instance_of.find(key);
      if (it == instance_of.end())
        throw scpdiag::DataError("predictions for model '" + model + "' are misaligned at (" +
                                 key.first + ", " + std::to_string(key.second) + ")");
      jobs.push_back({model, it->second, &forecast});
    }
  }
  log_line(std::to_string(jobs.size()) + " (model, instance) evaluations");

  struct Slot {
    std::optional<scpdiag::LurReport> report;
    std::string error;
  };
  std::vector<Slot> slots(jobs.size());
  parallel_for(jobs.size(), common.threads, [&](std::size_t i) {
    scpdiag::PredictionTriple triple;
    triple.history = jobs[i].pair->history;
    triple.future = jobs[i].pair->future;
    triple.prediction = *jobs[i].forecast;
    triple.model_id = jobs[i].model;
    try {
      slots[i].report = scpdiag::compute_lur(triple, cfg, &partition);
    } catch (const scpdiag::Error& e) {
      slots[i].error = e.what();
    }
  });

  const auto out_dir = prepare_out(common);
  json config_echo{{"command", "lur"},
                   {"data", data.data_path},
                   {"predictions", predictions_path},
                   {"horizon", data.horizon},
                   {"stride", data.stride},
                   {"split", data.split},
                   {"standardize", data.do_standardize},
                   {"welch", welch_echo(cfg)},
                   {"partition", partition_echo(partition)},
                   {"seed", common.seed},
                   {"threads", common.threads}};

  {
    std::ofstream out(out_dir / "lur_instances.csv");
    out << "# config: " << config_echo.dump() << '\n';
    out << "model_id,channel,index,var_y,p_model,p_linear,eta_linear,lur,error\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      out << jobs[i].model << ',' << jobs[i].pair->channel_id << ',' << jobs[i].pair->index
          << ',';
      if (slots[i].report) {
        const auto& r = *slots[i].report;
        out << fmt(r.var_y) << ',' << fmt(r.p_model) << ',' << fmt(r.p_linear) << ','
            << fmt(r.eta_linear) << ',' << (r.lur ? fmt(*r.lur) : std::string()) << ",\n";
      } else {
        std::string msg = slots[i].error;
        for (char& ch : msg)
          if (ch == ',') ch = ';';
        out << ",,,,," << msg << '\n';
      }
    }
  }

  // Fig-5-style per-band aggregate per model: pooled ratios over instances.
  struct BandAcc {
    double p_model = 0.0, p_linear = 0.0, energy = 0.0;
  };
  struct ModelAcc {
    std::vector<BandAcc> bands;
    double p_model = 0.0, p_linear = 0.0, var_y = 0.0;
    double lur_sum = 0.0;
    std::size_t lur_count = 0;
    std::size_t count = 0, failed = 0;
  };
  std::map<std::string, ModelAcc> models;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& acc = models[jobs[i].model];
    if (acc.bands.empty()) acc.bands.resize(partition.size());
    if (!slots[i].report) {
      acc.failed += 1;
      continue;
    }
    const auto& r = *slots[i].report;
    acc.count += 1;
    acc.p_model += r.p_model;
    acc.p_linear += r.p_linear;
    acc.var_y += r.var_y;
    if (r.lur) {
      acc.lur_sum += *r.lur;
      acc.lur_count += 1;
    }
    for (std::size_t b = 0; b < partition.size(); ++b) {
      acc.bands[b].p_model += r.band_breakdown[b].p_model;
      acc.bands[b].p_linear += r.band_breakdown[b].p_linear;
      acc.bands[b].energy += r.band_breakdown[b].energy_share * r.var_y;
    }
  }

  std::size_t succeeded = 0;
  json model_json = json::array();
  for (const auto& [model, acc] : models) {
    succeeded += acc.count;
    if (acc.count == 0) continue;
    json band_json = json::array();
    for (std::size_t b = 0; b < acc.bands.size(); ++b) {
      const auto& ba = acc.bands[b];
      std::optional<double> lur_b;
      if (ba.p_linear > scpdiag::kLurDenominatorFloor * acc.var_y)
        lur_b = ba.p_model / ba.p_linear;
      band_json.push_back(json{{"label", partition.labels[b]},
                               {"energy_share", ba.energy / acc.var_y},
                               {"lur", lur_b ? json(*lur_b) : json(nullptr)},
                               {"classification", scpdiag::to_string(scpdiag::classify_band(lur_b))}});
    }
    json m{{"model", model},
           {"instances", acc.count},
           {"instances_failed", acc.failed},
           {"lur", acc.p_linear > 0.0 ? json(acc.p_model / acc.p_linear) : json(nullptr)},
           {"mean_instance_lur",
            acc.lur_count > 0 ? json(acc.lur_sum / static_cast<double>(acc.lur_count))
                              : json(nullptr)},
           {"eta_linear", acc.var_y > 0.0 ? acc.p_linear / acc.var_y : 0.0},
           {"per_band", band_json}};
    model_json.push_back(std::move(m));
  }
  if (succeeded == 0) throw scpdiag::NumericError("every instance failed");

  json summary{{"schema_version", scpdiag::kReportSchemaVersion},
               {"type", "lur_summary"},
               {"models", model_json},
               {"run_config", config_echo}};
  if (common.report_format() == scpdiag::ReportFormat::json) {
    std::ofstream out(out_dir / "lur_summary.json");
    out << summary.dump(2) << '\n';
    log_line("wrote " + (out_dir / "lur_summary.json").string());
  } else {
    std::ofstream out(out_dir / "lur_summary.csv");
    out << "# config: " << config_echo.dump() << '\n';
    out << "model_id,band,energy_share,lur,classification\n";
    for (const auto& m : model_json)
      for (const auto& b : m.at("per_band")) {
        out << m.at("model").get<std::string>() << ',' << b.at("label").get<std::string>()
            << ',' << fmt(b.at("energy_share").get<double>()) << ','
            << (b.at("lur").is_null() ? std::string() : fmt(b.at("lur").get<double>())) << ','
            << b.at("classification").get<std::string>() << '\n';
      }
    log_line("wrote " + (out_dir / "lur_summary.csv").string());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bands

int cmd_bands(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
              const BandOpts& bands) {
  const auto table = data.load();
  const auto partition = bands.resolve();
  const auto [a, b] =
      scpdiag::detail::split_rows(table.row_count(), data.fractions(), data.split_enum());
  if (b <= a) throw scpdiag::DataError("empty split");
  const std::size_t len = b - a;
  const auto cfg = welch.resolve(len);

  json config_echo{{"command", "bands"},
                   {"data", data.data_path},
                   {"split", data.split},
                   {"welch", welch_echo(cfg)},
                   {"partition", partition_echo(partition)}};

  const auto out_dir = prepare_out(common);
  json rows = json::array();
  std::ofstream csv;
  if (common.report_format() == scpdiag::ReportFormat::csv) {
    csv.open(out_dir / "band_shares.csv");
    csv << "# config: " << config_echo.dump() << '\n';
    csv << "channel,band,lo,hi,share\n";
  }
  for (std::size_t c = 0; c < table.channel_count(); ++c) {
    std::vector<double> col(table.channels[c].begin() + static_cast<std::ptrdiff_t>(a),
                            table.channels[c].begin() + static_cast<std::ptrdiff_t>(b));
    scpdiag::remove_mean_in_place(col);
    const auto psd = scpdiag::welch_psd(col, cfg);
    const auto shares = scpdiag::band_energy_shares(psd, partition);
    for (std::size_t bi = 0; bi < shares.size(); ++bi) {
      if (csv.is_open()) {
        csv << table.channel_names[c] << ',' << partition.labels[bi] << ','
            << fmt(partition.bands[bi].lo) << ',' << fmt(partition.bands[bi].hi) << ','
            << fmt(shares[bi]) << '\n';
      }
      rows.push_back(json{{"channel", table.channel_names[c]},
                          {"band", partition.labels[bi]},
                          {"share", shares[bi]}});
    }
  }
  if (common.report_format() == scpdiag::ReportFormat::json) {
    json out_json{{"schema_version", scpdiag::kReportSchemaVersion},
                  {"type", "band_shares"},
                  {"rows", rows},
                  {"run_config", config_echo}};
    std::ofstream out(out_dir / "band_shares.json");
    out << out_json.dump(2) << '\n';
    log_line("wrote " + (out_dir / "band_shares.json").string());
  } else {
    log_line("wrote " + (out_dir / "band_shares.csv").string());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// toy

int cmd_toy(const CommonOpts& common, scpdiag::MultibandSpec spec, scpdiag::NoiseSpec noise,
            const WelchOpts& welch, scpdiag::FirSettings fir, std::size_t pair_length,
            const std::string& export_series, const std::string& export_fir) {
  spec.seed = common.seed;
  scpdiag::WelchConfig cfg;
  cfg.segment_length = welch.segment_length > 0 ? welch.segment_length : 256;
  cfg.overlap = welch.overlap_set ? welch.overlap : cfg.segment_length / 2;
  cfg.window = welch.window == "rectangular" || welch.window == "rect"
                   ? scpdiag::Window::rectangular
                   : scpdiag::Window::hann;
  cfg.epsilon = welch.epsilon;

  const auto table = scpdiag::run_toy_study(spec, noise, cfg, fir, pair_length);

  json config_echo{{"command", "toy"},
                   {"total_length", spec.total_length},
                   {"peak_bins", spec.peak_bins},
                   {"peak_widths", spec.peak_widths},
                   {"peak_amplitudes", spec.peak_amplitudes},
                   {"target_band_index", noise.target_band_index},
                   {"noise_levels", noise.noise_levels},
                   {"trials", noise.trials},
                   {"pair_length", pair_length},
                   {"fir_length", fir.length},
                   {"fir_ridge", fir.ridge},
                   {"welch", welch_echo(cfg)},
                   {"seed", common.seed}};

  const auto out_dir = prepare_out(common);
  const auto path =
      out_dir / (common.report_format() == scpdiag::ReportFormat::json ? "toy_study.json"
                                                                       : "toy_study.csv");
  scpdiag::write_report(table, common.report_format(), path, &config_echo);
  log_line("wrote " + path.string());

  if (!export_series.empty()) {
    auto clean_spec = spec;
    clean_spec.seed = scpdiag::mix_seed(spec.seed, 0);
    const auto series = scpdiag::generate_multiband_gp(clean_spec);
    std::vector<std::string> names{"gp"};
    std::vector<std::vector<double>> cols{series};
    scpdiag::write_series_csv(export_series, names, cols);
    log_line("wrote " + export_series);
  }
  if (!export_fir.empty()) {
    // refit on the noiseless histories, mirroring the level-0 sweep row
    auto clean_spec = spec;
    std::vector<scpdiag::RegressionSeries> training;
    const std::size_t mid = spec.total_length / 2;
    for (std::size_t t = 0; t < noise.trials; ++t) {
      clean_spec.seed = scpdiag::mix_seed(spec.seed, 2 * t);
      const auto series = scpdiag::generate_multiband_gp(clean_spec);
      scpdiag::RegressionSeries reg;
      reg.input.assign(series.begin() + static_cast<std::ptrdiff_t>(mid - pair_length),
                       series.begin() + static_cast<std::ptrdiff_t>(mid - 1));
      reg.target.assign(series.begin() + static_cast<std::ptrdiff_t>(mid - pair_length) + 1,
                        series.begin() + static_cast<std::ptrdiff_t>(mid));
      training.push_back(std::move(reg));
    }
    const auto filter = scpdiag::fit_fir(training, fir.length, fir.ridge);
    scpdiag::write_fir_csv(export_fir, filter);
    log_line("wrote " + export_fir);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// drift

int cmd_drift(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
              const BandOpts& bands, const std::string& channel,
              const std::string& predictions_path) {
  const auto table = data.load();
  const std::size_t chan = channel.empty() ? 0 : table.channel_index(channel);
  const auto cfg = welch.resolve(data.horizon);
  const auto partition = bands.resolve();
  const auto pairs = scpdiag::windowize(table, chan, data.horizon, data.horizon, data.stride,
                                        data.fractions(), data.split_enum());

  std::map<std::string, std::vector<std::vector<double>>> predictions;
  if (!predictions_path.empty()) {
    const auto preds = scpdiag::load_predictions(predictions_path, data.horizon);
    for (const auto& [model, per_key] : preds) {
      std::vector<std::vector<double>> aligned;
      aligned.reserve(pairs.size());
      for (const auto& p : pairs) {
        const auto it = per_key.find({p.channel_id, p.index});
        if (it == per_key.end())
          throw scpdiag::DataError("predictions for model '" + model + "' miss instance (" +
                                   p.channel_id + ", " + std::to_string(p.index) + ")");
        aligned.push_back(it->second);
      }
      predictions[model] = std::move(aligned);
    }
  }

  const auto drift =
      scpdiag::drift_profile(pairs, predictions.empty() ? nullptr : &predictions, cfg, partition);

  json config_echo{{"command", "drift"},
                   {"data", data.data_path},
                   {"channel", table.channel_names[chan]},
                   {"horizon", data.horizon},
                   {"stride", data.stride},
                   {"split", data.split},
                   {"welch", welch_echo(cfg)},
                   {"partition", partition_echo(partition)}};
  const auto out_dir = prepare_out(common);
  const auto path = out_dir / (common.report_format() == scpdiag::ReportFormat::json
                                   ? "drift_profile.json"
                                   : "drift_profile.csv");
  scpdiag::write_report(drift, common.report_format(), path, &config_echo);
  log_line("wrote " + path.string());
  return 0;
}

// ---------------------------------------------------------------------------
// stratify / correlate

int cmd_stratify(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
                 const std::string& records_path, const std::string& predictions_path,
                 std::size_t bins, std::size_t min_count) {
  std::vector<scpdiag::InstanceRecord> records;
  if (!records_path.empty()) {
    records = load_records_csv(records_path);
  } else {
    if (data.data_path.empty())
      throw scpdiag::ConfigError("stratify needs --records or --data with --predictions");
    records = build_records(data, welch, predictions_path, common.threads);
  }
  const auto report = scpdiag::stratify_by_p(records, bins, min_count);
  json config_echo{{"command", "stratify"}, {"records", records_path},
                   {"data", data.data_path}, {"predictions", predictions_path},
                   {"bins", bins},           {"min_count", min_count}};
  const auto out_dir = prepare_out(common);
  const auto path = out_dir / (common.report_format() == scpdiag::ReportFormat::json
                                   ? "stratified.json"
                                   : "stratified.csv");
  scpdiag::write_report(report, common.report_format(), path, &config_echo);
  log_line("wrote " + path.string());
  return 0;
}

int cmd_correlate(const CommonOpts& common, const DataOpts& data, const WelchOpts& welch,
                  const std::string& records_path, const std::string& predictions_path) {
  std::vector<scpdiag::InstanceRecord> records;
  if (!records_path.empty()) {
    records = load_records_csv(records_path);
  } else {
    if (data.data_path.empty())
      throw scpdiag::ConfigError("correlate needs --records or --data with --predictions");
    records = build_records(data, welch, predictions_path, common.threads);
  }
  const auto report = scpdiag::correlate_by_channel(records);
  json config_echo{{"command", "correlate"},
                   {"records", records_path},
                   {"data", data.data_path},
                   {"predictions", predictions_path}};
  const auto out_dir = prepare_out(common);
  const auto path = out_dir / (common.report_format() == scpdiag::ReportFormat::json
                                   ? "correlation.json"
                                   : "correlation.csv");
  scpdiag::write_report(report, common.report_format(), path, &config_echo);
  log_line("wrote " + path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral coherence predictability and linear utilization diagnostics"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* scp = app.add_subcommand("scp", "per-instance predictability and MSE lower bounds");
  CommonOpts scp_common;
  DataOpts scp_data;
  WelchOpts scp_welch;
  BandOpts scp_bands;
  int scp_band_index = -1;
  add_common(scp, scp_common);
  add_data(scp, scp_data);
  add_welch(scp, scp_welch);
  add_bands(scp, scp_bands);
  scp->add_option("--band", scp_band_index, "restrict aggregation to one band index");

  auto* lur = app.add_subcommand("lur", "linear utilization of model predictions");
  CommonOpts lur_common;
  DataOpts lur_data;
  WelchOpts lur_welch;
  BandOpts lur_bands;
  std::string lur_predictions;
  add_common(lur, lur_common);
  add_data(lur, lur_data);
  add_welch(lur, lur_welch);
  add_bands(lur, lur_bands);
  lur->add_option("--predictions", lur_predictions, "prediction dump CSV")->required();

  auto* bands_cmd = app.add_subcommand("bands", "band energy shares per channel");
  CommonOpts bands_common;
  DataOpts bands_data;
  WelchOpts bands_welch;
  BandOpts bands_bands;
  add_common(bands_cmd, bands_common);
  add_data(bands_cmd, bands_data);
  add_welch(bands_cmd, bands_welch);
  add_bands(bands_cmd, bands_bands);

  auto* toy = app.add_subcommand("toy", "synthetic noise-sweep study");
  CommonOpts toy_common;
  WelchOpts toy_welch;
  scpdiag::MultibandSpec toy_spec;
  scpdiag::NoiseSpec toy_noise;
  scpdiag::FirSettings toy_fir;
  std::size_t toy_pair_length = 512;
  std::string toy_export_series, toy_export_fir;
  add_common(toy, toy_common);
  add_welch(toy, toy_welch);
  toy->add_option("--total-length", toy_spec.total_length, "series length (2N)");
  toy->add_option("--peak-bins", toy_spec.peak_bins, "rFFT peak centers")->delimiter(',');
  toy->add_option("--peak-widths", toy_spec.peak_widths, "peak widths in bins")->delimiter(',');
  toy->add_option("--peak-amps", toy_spec.peak_amplitudes, "peak amplitudes")->delimiter(',');
  toy->add_option("--target-band", toy_noise.target_band_index, "noise target peak index");
  toy->add_option("--levels", toy_noise.noise_levels, "noise levels")->delimiter(',');
  toy->add_option("--trials", toy_noise.trials, "trials per level");
  toy->add_option("--pair-length", toy_pair_length, "history/future length");
  toy->add_option("--fir-length", toy_fir.length, "FIR filter length");
  toy->add_option("--ridge", toy_fir.ridge, "FIR ridge penalty");
  toy->add_option("--export-series", toy_export_series, "write the clean trial-0 series CSV");
  toy->add_option("--export-fir", toy_export_fir, "write noiseless FIR coefficients CSV");

  auto* drift = app.add_subcommand("drift", "per-instance predictable-energy profile");
  CommonOpts drift_common;
  DataOpts drift_data;
  WelchOpts drift_welch;
  BandOpts drift_bands;
  std::string drift_channel, drift_predictions;
  add_common(drift, drift_common);
  add_data(drift, drift_data);
  add_welch(drift, drift_welch);
  add_bands(drift, drift_bands);
  drift->add_option("--channel", drift_channel, "channel name (default: first)");
  drift->add_option("--predictions", drift_predictions, "optional prediction dump CSV");

  auto* stratify = app.add_subcommand("stratify", "predictability-stratified evaluation");
  CommonOpts strat_common;
  DataOpts strat_data;
  WelchOpts strat_welch;
  std::string strat_records, strat_predictions;
  std::size_t strat_bins = 10, strat_min_count = 20;
  add_common(stratify, strat_common);
  add_data(stratify, strat_data, /*required=*/false);
  add_welch(stratify, strat_welch);
  stratify->add_option("--records", strat_records, "records CSV (channel,index,p,...)");
  stratify->add_option("--predictions", strat_predictions, "prediction dump CSV");
  stratify->add_option("--bins", strat_bins, "equal-width bin count");
  stratify->add_option("--min-count", strat_min_count, "minimum instances per bin");

  auto* correlate = app.add_subcommand("correlate", "per-channel bound/error correlation");
  CommonOpts corr_common;
  DataOpts corr_data;
  WelchOpts corr_welch;
  std::string corr_records, corr_predictions;
  add_common(correlate, corr_common);
  add_data(correlate, corr_data, /*required=*/false);
  add_welch(correlate, corr_welch);
  correlate->add_option("--records", corr_records, "records CSV");
  correlate->add_option("--predictions", corr_predictions, "prediction dump CSV");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "scpdiag: " << e.what() << '\n';
      return 1;
    }

    CLI::App* active = app.get_subcommands().front();
    CommonOpts* common = nullptr;
    if (active == scp) common = &scp_common;
    else if (active == lur) common = &lur_common;
    else if (active == bands_cmd) common = &bands_common;
    else if (active == toy) common = &toy_common;
    else if (active == drift) common = &drift_common;
    else if (active == stratify) common = &strat_common;
    else common = &corr_common;
    apply_config_file(active, common->config_path);

    if (active == scp)
      return cmd_scp(scp_common, scp_data, scp_welch, scp_bands, scp_band_index);
    if (active == lur)
      return cmd_lur(lur_common, lur_data, lur_welch, lur_bands, lur_predictions);
    if (active == bands_cmd)
      return cmd_bands(bands_common, bands_data, bands_welch, bands_bands);
    if (active == toy)
      return cmd_toy(toy_common, toy_spec, toy_noise, toy_welch, toy_fir, toy_pair_length,
                     toy_export_series, toy_export_fir);
    if (active == drift)
      return cmd_drift(drift_common, drift_data, drift_welch, drift_bands, drift_channel,
                       drift_predictions);
    if (active == stratify)
      return cmd_stratify(strat_common, strat_data, strat_welch, strat_records,
                          strat_predictions, strat_bins, strat_min_count);
    return cmd_correlate(corr_common, corr_data, corr_welch, corr_records, corr_predictions);
  } catch (const scpdiag::ConfigError& e) {
    std::cerr << "scpdiag: config error: " << e.what() << '\n';
    return 1;
  } catch (const scpdiag::NumericError& e) {
    std::cerr << "scpdiag: numeric error: " << e.what() << '\n';
    return 3;
  } catch (const scpdiag::Error& e) {
    std::cerr << "scpdiag: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "scpdiag: " << e.what() << '\n';
    return 2;
  }
}
