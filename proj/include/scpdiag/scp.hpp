#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scpdiag/bands.hpp"
#include "scpdiag/common.hpp"
#include "scpdiag/spectral.hpp"

// Spectral Coherence Predictability: a per-instance lower bound on the MSE
// of any linear time-invariant predictor of the future given the history,
// and the predictability score derived from it.
//
// For one (history, future) pair the steps are: record the squared mean
// shift across the boundary, mean-remove both sides, estimate the Welch
// auto and cross spectra, form the squared coherence, multiply the future
// spectrum by (1 - coherence) to get the residual spectrum, and aggregate.
// The mean-shift term belongs to the full-grid aggregate only; band
// aggregates stay purely spectral so that they add up exactly.

namespace scpdiag {

struct SegmentPair {
  std::vector<double> history;
  std::vector<double> future;
  std::string channel_id;
  std::int64_t index = 0;

  void validate() const {
    if (history.size() != future.size())
      throw ShapeError("segment pair: history and future lengths differ");
    if (history.empty()) throw DataError("segment pair: empty vectors");
    if (!all_finite(history) || !all_finite(future))
      throw DataError("segment pair: non-finite values");
  }
};

struct BandScp {
  std::string label;
  double var_y = 0.0;
  double mse_lb = 0.0;
  std::optional<double> p;  // unset when the band carries no target power
};

struct ScpReport {
  double delta_sq = 0.0;            // squared history/future mean shift
  PowerSpectrum residual_spectrum;  // future power unexplained per bin
  double var_y = 0.0;
  double mse_lb = 0.0;
  double p_raw = 0.0;  // 1 - mse_lb / var_y, unclamped
  double p = 0.0;      // p_raw clamped into [0, 1]
  std::vector<BandScp> band_breakdown;
  std::optional<Band> restricted_to;  // set when a single band was aggregated
  WelchConfig config;
  double epsilon_used = 0.0;
  std::string channel_id;
  std::int64_t index = 0;
};

namespace detail {

struct ScpCore {
  double delta_sq = 0.0;
  PowerSpectrum s_yy;
  PowerSpectrum residual;
  double epsilon = 0.0;
};

inline ScpCore scp_core(const SegmentPair& pair, const WelchConfig& cfg) {
  pair.validate();
  if (is_constant(pair.future))
    throw DataError("compute_scp: future segment has zero variance");
  std::vector<double> x(pair.history.begin(), pair.history.end());
  std::vector<double> y(pair.future.begin(), pair.future.end());
  const double m_x = remove_mean_in_place(x);
  const double m_y = remove_mean_in_place(y);

  const PowerSpectrum s_xx = welch_psd(x, cfg);
  PowerSpectrum s_yy = welch_psd(y, cfg);
  const CrossSpectrum s_xy = welch_cpsd(x, y, cfg);
  const double eps = resolve_epsilon(cfg, s_xx, s_yy);
  const CoherenceProfile gamma = coherence(s_xy, s_xx, s_yy, eps);

  ScpCore core;
  core.delta_sq = (m_y - m_x) * (m_y - m_x);
  core.residual.grid = s_yy.grid;
  core.residual.power.resize(s_yy.power.size());
  for (std::size_t j = 0; j < s_yy.power.size(); ++j)
    core.residual.power[j] = s_yy.power[j] * (1.0 - gamma.gamma_sq[j]);
  core.s_yy = std::move(s_yy);
  core.epsilon = eps;
  return core;
}

inline ScpReport scp_report_from_core(detail::ScpCore core, const SegmentPair& pair,
                                      const WelchConfig& cfg) {
  ScpReport r;
  r.delta_sq = core.delta_sq;
  r.var_y = core.s_yy.total();
  if (!(r.var_y > 0.0))
    throw DataError("compute_scp: future segment has zero variance");
  r.residual_spectrum = std::move(core.residual);
  r.mse_lb = r.delta_sq + r.residual_spectrum.total();
  r.p_raw = 1.0 - r.mse_lb / r.var_y;
  r.p = clamp01(r.p_raw);
  r.config = cfg;
  r.epsilon_used = core.epsilon;
  r.channel_id = pair.channel_id;
  r.index = pair.index;
  return r;
}

}  // namespace detail

/// Full-grid SCP for one instance. Throws DataError when the future has
/// zero variance (the score divides by it).
inline ScpReport compute_scp(const SegmentPair& pair, const WelchConfig& cfg) {
  return detail::scp_report_from_core(detail::scp_core(pair, cfg), pair, cfg);
}

/// Full-grid SCP plus a per-band breakdown. Band aggregates exclude the
/// mean-shift term, so summing band mse_lb over a covering partition and
/// adding delta_sq reproduces the full-grid mse_lb.
inline ScpReport compute_scp(const SegmentPair& pair, const WelchConfig& cfg,
                             const BandPartition& partition) {
  auto core = detail::scp_core(pair, cfg);
  const PowerSpectrum s_yy = core.s_yy;  // keep a copy before the move below
  ScpReport r = detail::scp_report_from_core(std::move(core), pair, cfg);
  const auto map = partition.bin_map(s_yy.grid);
  std::vector<double> var_b(partition.size(), 0.0);
  std::vector<double> mse_b(partition.size(), 0.0);
  for (std::size_t j = 0; j < map.size(); ++j) {
    var_b[map[j]] += s_yy.power[j];
    mse_b[map[j]] += r.residual_spectrum.power[j];
  }
  for (std::size_t b = 0; b < partition.size(); ++b) {
    BandScp band;
    band.label = partition.labels[b];
    band.var_y = var_b[b];
    band.mse_lb = mse_b[b];
    if (var_b[b] > 0.0) band.p = clamp01(1.0 - mse_b[b] / var_b[b]);
    r.band_breakdown.push_back(std::move(band));
  }
  return r;
}

/// SCP restricted to a single frequency band: var_y, mse_lb and p cover
/// only the selected bins and the mean-shift term is reported but not added.
inline ScpReport compute_scp(const SegmentPair& pair, const WelchConfig& cfg,
                             const Band& band) {
  auto core = detail::scp_core(pair, cfg);
  ScpReport r;
  r.delta_sq = core.delta_sq;
  r.config = cfg;
  r.epsilon_used = core.epsilon;
  r.channel_id = pair.channel_id;
  r.index = pair.index;
  r.restricted_to = band;
  double var_b = 0.0;
  double mse_b = 0.0;
  const auto& freqs = core.s_yy.grid.frequencies;
  const bool closes_nyquist = band.hi >= 0.5;
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const double f = freqs[j];
    const bool inside = f >= band.lo && (f < band.hi || (closes_nyquist && f == 0.5));
    if (!inside) continue;
    var_b += core.s_yy.power[j];
    mse_b += core.residual.power[j];
  }
  r.residual_spectrum = std::move(core.residual);
  r.var_y = var_b;
  r.mse_lb = mse_b;
  if (!(var_b > 0.0))
    throw DataError("compute_scp: selected band carries no target power");
  r.p_raw = 1.0 - mse_b / var_b;
  r.p = clamp01(r.p_raw);
  return r;
}

struct ScpBatchEntry {
  std::optional<ScpReport> report;
  std::string error;

  bool ok() const { return report.has_value(); }
};

/// Element-wise compute_scp over a batch; per-element failures are recorded
/// instead of aborting the rest.
inline std::vector<ScpBatchEntry> scp_batch(std::span<const SegmentPair> pairs,
                                            const WelchConfig& cfg,
                                            const BandPartition* partition = nullptr) {
  if (pairs.empty()) throw DataError("scp_batch: empty batch");
  std::vector<ScpBatchEntry> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      out[i].report = partition ? compute_scp(pairs[i], cfg, *partition)
                                : compute_scp(pairs[i], cfg);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace scpdiag
