#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scpdiag/bands.hpp"
#include "scpdiag/common.hpp"
#include "scpdiag/spectral.hpp"

// Linear Utilization Ratio: compares the target power a model's prediction
// actually captures (prediction-target coherence weighted by the target
// spectrum) with the power any linear predictor could capture from the
// history (history-target coherence weighted the same way).

namespace scpdiag {

struct PredictionTriple {
  std::vector<double> history;
  std::vector<double> future;
  std::vector<double> prediction;
  std::string model_id;

  void validate() const {
    if (history.size() != future.size() || prediction.size() != future.size())
      throw ShapeError("prediction triple: history, future and prediction lengths differ");
    if (future.empty()) throw DataError("prediction triple: empty vectors");
    if (!all_finite(history) || !all_finite(future) || !all_finite(prediction))
      throw DataError("prediction triple: non-finite values");
  }
};

struct BandLur {
  std::string label;
  double p_model = 0.0;
  double p_linear = 0.0;
  std::optional<double> lur;  // unset when p_linear is below the threshold
  double energy_share = 0.0;
};

struct LurReport {
  double p_model = 0.0;   // coherence-captured target power of the model
  double p_linear = 0.0;  // linearly explainable target power
  double eta_linear = 0.0;
  std::optional<double> lur;
  double var_y = 0.0;
  std::vector<BandLur> band_breakdown;
  WelchConfig config;
  double epsilon_used = 0.0;
  std::string model_id;
};

/// Relative denominator floor below which the ratio is reported undefined.
inline constexpr double kLurDenominatorFloor = 1e-10;

inline LurReport compute_lur(const PredictionTriple& triple, const WelchConfig& cfg,
                             const BandPartition* partition = nullptr) {
  triple.validate();
  if (is_constant(triple.future))
    throw DataError("compute_lur: future segment has zero variance");
  std::vector<double> x(triple.history);
  std::vector<double> y(triple.future);
  std::vector<double> yh(triple.prediction);
  remove_mean_in_place(x);
  remove_mean_in_place(y);
  remove_mean_in_place(yh);

  const PowerSpectrum s_xx = welch_psd(x, cfg);
  const PowerSpectrum s_yy = welch_psd(y, cfg);
  const PowerSpectrum s_hh = welch_psd(yh, cfg);
  const CrossSpectrum s_yx = welch_cpsd(y, x, cfg);
  const CrossSpectrum s_yh = welch_cpsd(y, yh, cfg);

  const double eps = resolve_epsilon(cfg, s_xx, s_yy);
  const CoherenceProfile g_yx = coherence(s_yx, s_yy, s_xx, eps);
  const CoherenceProfile g_yh = coherence(s_yh, s_yy, s_hh, eps);

  LurReport r;
  r.config = cfg;
  r.epsilon_used = eps;
  r.model_id = triple.model_id;
  r.var_y = s_yy.total();
  if (!(r.var_y > 0.0))
    throw DataError("compute_lur: future segment has zero variance");

  for (std::size_t j = 0; j < s_yy.power.size(); ++j) {
    r.p_model += g_yh.gamma_sq[j] * s_yy.power[j];
    r.p_linear += g_yx.gamma_sq[j] * s_yy.power[j];
  }
  r.eta_linear = r.p_linear / r.var_y;
  const double floor = kLurDenominatorFloor * r.var_y;
  if (r.p_linear > floor) r.lur = r.p_model / r.p_linear;

  if (partition) {
    const auto map = partition->bin_map(s_yy.grid);
    std::vector<BandLur> bands(partition->size());
    for (std::size_t b = 0; b < bands.size(); ++b) bands[b].label = partition->labels[b];
    std::vector<double> energy(partition->size(), 0.0);
    for (std::size_t j = 0; j < map.size(); ++j) {
      bands[map[j]].p_model += g_yh.gamma_sq[j] * s_yy.power[j];
      bands[map[j]].p_linear += g_yx.gamma_sq[j] * s_yy.power[j];
      energy[map[j]] += s_yy.power[j];
    }
    for (std::size_t b = 0; b < bands.size(); ++b) {
      bands[b].energy_share = energy[b] / r.var_y;
      if (bands[b].p_linear > floor) bands[b].lur = bands[b].p_model / bands[b].p_linear;
    }
    r.band_breakdown = std::move(bands);
  }
  return r;
}

enum class BandClass { under_utilizing, saturating, beyond_linear, undefined };

inline const char* to_string(BandClass c) {
  switch (c) {
    case BandClass::under_utilizing: return "under_utilizing";
    case BandClass::saturating: return "saturating";
    case BandClass::beyond_linear: return "beyond_linear";
    default: return "undefined";
  }
}

/// Three-way diagnosis of a band's utilization ratio against the linear
/// limit; undefined ratios pass through.
inline BandClass classify_band(std::optional<double> lur_b, double tolerance = 0.05) {
  if (!(tolerance > 0.0)) throw ConfigError("classify_band: tolerance must be positive");
  if (!lur_b.has_value()) return BandClass::undefined;
  if (*lur_b < 1.0 - tolerance) return BandClass::under_utilizing;
  if (*lur_b > 1.0 + tolerance) return BandClass::beyond_linear;
  return BandClass::saturating;
}

}  // namespace scpdiag
