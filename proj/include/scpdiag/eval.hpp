#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scpdiag/bands.hpp"
#include "scpdiag/baseline.hpp"
#include "scpdiag/common.hpp"
#include "scpdiag/scp.hpp"
#include "scpdiag/spectral.hpp"
#include "scpdiag/synth.hpp"

// Dataset-level evaluation: normalized errors, correlation between realized
// model error and the spectral lower bound, predictability-stratified
// reporting, drift profiles, and the synthetic noise-sweep study.

namespace scpdiag {

/// MSE divided by the (per-instance) future variance.
inline double nmse(double mse, double var_y) {
  if (!(var_y > 0.0)) throw DataError("nmse: variance must be positive");
  return mse / var_y;
}

/// Product-moment correlation; needs at least three points and nonzero
/// variance on both sides.
inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ShapeError("pearson_r: length mismatch");
  if (xs.size() < 3) throw DataError("pearson_r: need at least 3 points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw NumericError("pearson_r: undefined correlation (degenerate variance)");
  return sxy / std::sqrt(sxx * syy);
}

struct InstanceRecord {
  std::string channel_id;
  std::int64_t index = 0;
  double p = 0.0;
  double mse_lb = 0.0;
  double var_y = 0.0;
  std::map<std::string, double> model_mse;
};

struct StratifiedCell {
  std::size_t bin = 0;
  std::string model_id;
  std::size_t count = 0;
  double mean_mse = std::numeric_limits<double>::quiet_NaN();
  bool below_min_count = false;
};

struct StratifiedReport {
  std::vector<double> bin_edges;  // bin_count + 1 equal-width edges over [0, 1]
  std::size_t min_count = 0;
  std::vector<StratifiedCell> cells;  // one per (bin, model), models sorted
};

/// Groups records into equal-width predictability bins (half-open, last bin
/// closed at 1) and reports per-bin per-model mean MSE with counts. Bins
/// under the minimum count are flagged, never dropped.
inline StratifiedReport stratify_by_p(std::span<const InstanceRecord> records,
                                      std::size_t bin_count = 10,
                                      std::size_t min_count = 20) {
  if (bin_count < 2) throw ConfigError("stratify_by_p: need at least 2 bins");
  if (records.empty()) throw DataError("stratify_by_p: empty records");

  StratifiedReport report;
  report.min_count = min_count;
  for (std::size_t b = 0; b <= bin_count; ++b)
    report.bin_edges.push_back(static_cast<double>(b) / static_cast<double>(bin_count));

  std::map<std::string, std::vector<std::pair<double, std::size_t>>> sums;  // model -> per-bin (sum, count)
  for (const auto& rec : records) {
    const auto bin = std::min<std::size_t>(
        bin_count - 1,
        static_cast<std::size_t>(std::floor(clamp01(rec.p) * static_cast<double>(bin_count))));
    for (const auto& [model, mse] : rec.model_mse) {
      auto& row = sums[model];
      if (row.empty()) row.assign(bin_count, {0.0, 0});
      row[bin].first += mse;
      row[bin].second += 1;
    }
  }
  for (const auto& [model, row] : sums) {
    for (std::size_t b = 0; b < bin_count; ++b) {
      StratifiedCell cell;
      cell.bin = b;
      cell.model_id = model;
      cell.count = row[b].second;
      if (cell.count > 0) cell.mean_mse = row[b].first / static_cast<double>(cell.count);
      cell.below_min_count = cell.count < min_count;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

struct DriftSeries {
  std::vector<std::int64_t> indices;
  std::vector<std::string> band_labels;
  std::vector<std::vector<double>> band_shares;  // [instance][band]
  std::vector<double> eta_linear;                // row sums of band_shares
  std::map<std::string, std::vector<double>> model_mse;
};

/// Per-instance band-wise linearly predictable energy shares along one
/// channel, optionally aligned with realized model errors. Pairs must be in
/// increasing index order.
inline DriftSeries drift_profile(
    std::span<const SegmentPair> pairs,
    const std::map<std::string, std::vector<std::vector<double>>>* predictions,
    const WelchConfig& cfg, const BandPartition& partition) {
  if (pairs.empty()) throw DataError("drift_profile: no instances");
  for (std::size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].index <= pairs[i - 1].index)
      throw DataError("drift_profile: instance indices must be strictly increasing");
  if (predictions) {
    for (const auto& [model, fcsts] : *predictions)
      if (fcsts.size() != pairs.size())
        throw ShapeError("drift_profile: prediction count for model '" + model +
                         "' does not match instance count");
  }

  DriftSeries out;
  out.band_labels = partition.labels;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    pair.validate();
    if (is_constant(pair.future))
      throw DataError("drift_profile: zero-variance future at index " +
                      std::to_string(pair.index));
    std::vector<double> x(pair.history);
    std::vector<double> y(pair.future);
    remove_mean_in_place(x);
    remove_mean_in_place(y);
    const PowerSpectrum s_xx = welch_psd(x, cfg);
    const PowerSpectrum s_yy = welch_psd(y, cfg);
    const CrossSpectrum s_xy = welch_cpsd(x, y, cfg);
    const double eps = resolve_epsilon(cfg, s_xx, s_yy);
    const CoherenceProfile gamma = coherence(s_xy, s_xx, s_yy, eps);
    const double var_y = s_yy.total();
    if (!(var_y > 0.0)) throw DataError("drift_profile: zero-variance future at index " +
                                        std::to_string(pair.index));
    std::vector<double> shares(partition.size(), 0.0);
    const auto map = partition.bin_map(s_yy.grid);
    for (std::size_t j = 0; j < map.size(); ++j)
      shares[map[j]] += gamma.gamma_sq[j] * s_yy.power[j] / var_y;
    double eta = 0.0;
    for (double s : shares) eta += s;
    out.indices.push_back(pair.index);
    out.band_shares.push_back(std::move(shares));
    out.eta_linear.push_back(eta);
    if (predictions) {
      for (const auto& [model, fcsts] : *predictions) {
        const auto& f = fcsts[i];
        if (f.size() != pair.future.size())
          throw ShapeError("drift_profile: forecast length mismatch for model '" + model +
                           "' at index " + std::to_string(pair.index));
        double mse = 0.0;
        for (std::size_t t = 0; t < f.size(); ++t) {
          const double d = f[t] - pair.future[t];
          mse += d * d;
        }
        out.model_mse[model].push_back(mse / static_cast<double>(f.size()));
      }
    }
  }
  return out;
}

struct CorrelationPoint {
  std::string channel_id;
  double mean_mse_lb = 0.0;
  std::map<std::string, double> mean_mse;
};

struct CorrelationReport {
  std::vector<CorrelationPoint> points;       // one per channel
  std::map<std::string, double> pearson;      // per model, over channel means
  std::string scope = "per-channel means";
};

/// Per-channel mean (mse_lb, model MSE) points and the Pearson correlation
/// across channels for every model present in all records.
inline CorrelationReport correlate_by_channel(std::span<const InstanceRecord> records) {
  if (records.empty()) throw DataError("correlate_by_channel: empty records");
  struct Acc {
    double lb = 0.0;
    std::size_t n = 0;
    std::map<std::string, std::pair<double, std::size_t>> mse;
  };
  std::map<std::string, Acc> by_channel;
  for (const auto& rec : records) {
    auto& acc = by_channel[rec.channel_id];
    acc.lb += rec.mse_lb;
    acc.n += 1;
    for (const auto& [model, mse] : rec.model_mse) {
      acc.mse[model].first += mse;
      acc.mse[model].second += 1;
    }
  }
  CorrelationReport report;
  for (const auto& [channel, acc] : by_channel) {
    CorrelationPoint pt;
    pt.channel_id = channel;
    pt.mean_mse_lb = acc.lb / static_cast<double>(acc.n);
    for (const auto& [model, sum] : acc.mse)
      pt.mean_mse[model] = sum.first / static_cast<double>(sum.second);
    report.points.push_back(std::move(pt));
  }
  std::map<std::string, std::vector<double>> xs_by_model, ys_by_model;
  for (const auto& pt : report.points) {
    for (const auto& [model, mse] : pt.mean_mse) {
      xs_by_model[model].push_back(pt.mean_mse_lb);
      ys_by_model[model].push_back(mse);
    }
  }
  for (const auto& [model, xs] : xs_by_model) {
    if (xs.size() >= 3) report.pearson[model] = pearson_r(xs, ys_by_model[model]);
  }
  return report;
}

struct FirSettings {
  std::size_t length = 64;
  double ridge = 1e-6;
};

struct ToyStudyRow {
  double noise_level = 0.0;
  double mean_model_mse = 0.0;
  double mean_mse_lb = 0.0;
  double mean_p = 0.0;
};

struct ToyStudyTable {
  std::vector<ToyStudyRow> rows;  // sorted by noise level
  std::size_t pair_length = 0;
};

/// Noise sweep on the synthetic multiband process. Per trial one clean
/// series is generated and split at its midpoint into a boundary pair of
/// length pair_length; per noise level the same trial realizations receive
/// the same shaped-noise realization scaled to the level, the FIR forecaster
/// is refit on the noisy histories (rows pooled across trials), rolled out,
/// and realized MSE, mse_lb and p are averaged over trials.
inline ToyStudyTable run_toy_study(const MultibandSpec& spec, const NoiseSpec& noise,
                                   const WelchConfig& welch, const FirSettings& fir,
                                   std::size_t pair_length = 512) {
  spec.validate();
  noise.validate(spec);
  if (2 * pair_length > spec.total_length)
    throw ConfigError("run_toy_study: pair_length exceeds half the series length");

  std::vector<std::vector<double>> cleans;
  std::vector<std::uint64_t> noise_seeds;
  for (std::size_t t = 0; t < noise.trials; ++t) {
    MultibandSpec trial_spec = spec;
    trial_spec.seed = mix_seed(spec.seed, 2 * t);
    cleans.push_back(generate_multiband_gp(trial_spec));
    noise_seeds.push_back(mix_seed(spec.seed, 2 * t + 1));
  }

  const std::size_t mid = spec.total_length / 2;
  ToyStudyTable table;
  table.pair_length = pair_length;
  for (double level : noise.noise_levels) {
    std::vector<std::vector<double>> xs, ys;
    std::vector<RegressionSeries> training;
    for (std::size_t t = 0; t < noise.trials; ++t) {
      const auto noisy = add_bandlimited_noise(cleans[t], spec, noise, level, noise_seeds[t]);
      std::vector<double> x(noisy.begin() + (mid - pair_length), noisy.begin() + mid);
      std::vector<double> y(noisy.begin() + mid, noisy.begin() + (mid + pair_length));
      RegressionSeries reg;
      reg.input.assign(x.begin(), x.end() - 1);
      reg.target.assign(x.begin() + 1, x.end());
      training.push_back(std::move(reg));
      xs.push_back(std::move(x));
      ys.push_back(std::move(y));
    }
    const FirFilter filter = fit_fir(training, fir.length, fir.ridge);
    ToyStudyRow row;
    row.noise_level = level;
    for (std::size_t t = 0; t < noise.trials; ++t) {
      const auto forecast = predict_fir(filter, xs[t], pair_length);
      double mse = 0.0;
      for (std::size_t i = 0; i < pair_length; ++i) {
        const double d = forecast[i] - ys[t][i];
        mse += d * d;
      }
      mse /= static_cast<double>(pair_length);
      SegmentPair pair;
      pair.history = xs[t];
      pair.future = ys[t];
      pair.index = static_cast<std::int64_t>(t);
      const ScpReport scp = compute_scp(pair, welch);
      row.mean_model_mse += mse;
      row.mean_mse_lb += scp.mse_lb;
      row.mean_p += scp.p;
    }
    const double inv = 1.0 / static_cast<double>(noise.trials);
    row.mean_model_mse *= inv;
    row.mean_mse_lb *= inv;
    row.mean_p *= inv;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace scpdiag
