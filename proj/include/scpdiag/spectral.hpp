#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scpdiag/common.hpp"
#include "scpdiag/detail/fft.hpp"

// Welch power- and cross-spectral estimation on a shared one-sided grid of
// normalized frequencies, plus magnitude-squared coherence.
//
// Normalization convention: spectra are variance-preserving. Every estimate
// is rescaled so that the bin powers of a PSD sum to the mean square of its
// input (equal to the sample variance once the caller has removed the mean,
// which all higher-level routines do). Cross spectra carry the geometric
// mean of the two channel scales, so coherence is unaffected by the
// rescaling and welch_cpsd(a, a) reproduces welch_psd(a).

namespace scpdiag {

enum class Window { hann, rectangular };

inline const char* to_string(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

struct WelchConfig {
  std::size_t segment_length = 0;
  std::size_t overlap = 0;          // samples shared by consecutive segments
  Window window = Window::hann;
  double epsilon = 0.0;             // <= 0 selects the relative floor rule

  std::size_t step() const { return segment_length - overlap; }

  std::size_t segment_count(std::size_t n) const {
    if (segment_length == 0 || segment_length > n) return 0;
    return 1 + (n - segment_length) / step();
  }

  /// Throws unless this config yields at least two segments on a length-n
  /// series. Coherence from a single segment is identically one, so K >= 2
  /// is required everywhere.
  void validate(std::size_t n) const {
    if (segment_length < 2)
      throw ConfigError("welch: segment_length must be at least 2");
    if (overlap >= segment_length)
      throw ConfigError("welch: overlap must be smaller than segment_length");
    if (segment_length > n)
      throw DataError("welch: series length " + std::to_string(n) +
                      " is shorter than segment_length " + std::to_string(segment_length));
    if (segment_count(n) < 2)
      throw DataError("welch: config yields fewer than 2 segments on length " +
                      std::to_string(n));
  }

  /// Defaults used for real forecasting instances: Hann window, segment
  /// length floor(0.25 n), 50% overlap.
  static WelchConfig for_length(std::size_t n) {
    WelchConfig cfg;
    cfg.segment_length = n / 4;
    cfg.overlap = cfg.segment_length / 2;
    cfg.window = Window::hann;
    return cfg;
  }
};

struct FrequencyGrid {
  std::vector<double> frequencies;  // cycles/sample, ascending, in [0, 0.5]

  std::size_t bin_count() const { return frequencies.size(); }

  static FrequencyGrid one_sided(std::size_t segment_length) {
    FrequencyGrid g;
    const std::size_t bins = segment_length / 2 + 1;
    g.frequencies.resize(bins);
    for (std::size_t j = 0; j < bins; ++j)
      g.frequencies[j] = static_cast<double>(j) / static_cast<double>(segment_length);
    return g;
  }

  bool operator==(const FrequencyGrid& other) const {
    return frequencies == other.frequencies;
  }
};

struct PowerSpectrum {
  FrequencyGrid grid;
  std::vector<double> power;  // nonnegative, sums to the input mean square

  double total() const {
    double acc = 0.0;
    for (double p : power) acc += p;
    return acc;
  }

  double mean_bin_power() const {
    return power.empty() ? 0.0 : total() / static_cast<double>(power.size());
  }
};

struct CrossSpectrum {
  FrequencyGrid grid;
  std::vector<std::complex<double>> value;
};

struct CoherenceProfile {
  FrequencyGrid grid;
  std::vector<double> gamma_sq;  // in [0, 1] per bin
};

/// Window weights of the given length; Hann uses the periodic convention
/// (first weight exactly zero).
inline std::vector<double> make_window(Window kind, std::size_t length) {
  if (length < 2) throw ConfigError("make_window: length must be at least 2");
  std::vector<double> w(length);
  if (kind == Window::rectangular) {
    std::fill(w.begin(), w.end(), 1.0);
  } else {
    for (std::size_t i = 0; i < length; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(length));
  }
  return w;
}

namespace detail {

struct WelchAccumulator {
  std::vector<std::complex<double>> cross;  // sum over segments of A * conj(B)
  std::vector<double> auto_a;               // sum of |A|^2
  std::vector<double> auto_b;               // sum of |B|^2
};

// Segment-averaged raw spectra of a against b with one-sided folding but no
// variance rescaling yet. Callers pass a == b for plain PSDs.
inline WelchAccumulator welch_accumulate(std::span<const double> a,
                                         std::span<const double> b,
                                         const WelchConfig& cfg) {
  const std::size_t L = cfg.segment_length;
  const std::size_t K = cfg.segment_count(a.size());
  const std::size_t bins = L / 2 + 1;
  const std::vector<double> win = make_window(cfg.window, L);
  double wss = 0.0;
  for (double w : win) wss += w * w;

  WelchAccumulator acc;
  acc.cross.assign(bins, {0.0, 0.0});
  acc.auto_a.assign(bins, 0.0);
  acc.auto_b.assign(bins, 0.0);

  std::vector<double> seg_a(L), seg_b(L);
  const bool same = a.data() == b.data();
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t off = k * cfg.step();
    for (std::size_t i = 0; i < L; ++i) seg_a[i] = a[off + i] * win[i];
    const auto fa = rfft(seg_a);
    if (same) {
      for (std::size_t j = 0; j < bins; ++j) {
        const double n = std::norm(fa[j]);
        acc.cross[j] += std::complex<double>(n, 0.0);
        acc.auto_a[j] += n;
        acc.auto_b[j] += n;
      }
    } else {
      for (std::size_t i = 0; i < L; ++i) seg_b[i] = b[off + i] * win[i];
      const auto fb = rfft(seg_b);
      for (std::size_t j = 0; j < bins; ++j) {
        acc.cross[j] += std::conj(fa[j]) * fb[j];
        acc.auto_a[j] += std::norm(fa[j]);
        acc.auto_b[j] += std::norm(fb[j]);
      }
    }
  }

  // Periodogram scale 1/(K L sum(w^2)), then fold the two-sided density:
  // interior bins carry the doubled power, DC and Nyquist do not.
  const double scale = 1.0 / (static_cast<double>(K) * static_cast<double>(L) * wss);
  const bool has_nyquist = (L % 2 == 0);
  for (std::size_t j = 0; j < bins; ++j) {
    double fold = 2.0;
    if (j == 0 || (has_nyquist && j == bins - 1)) fold = 1.0;
    acc.cross[j] *= scale * fold;
    acc.auto_a[j] *= scale * fold;
    acc.auto_b[j] *= scale * fold;
  }
  return acc;
}

inline double rescale_factor(double target, std::span<const double> raw) {
  double tot = 0.0;
  for (double v : raw) tot += v;
  return tot > 0.0 ? target / tot : 1.0;
}

}  // namespace detail

/// Welch PSD of a series the caller has already mean-removed. One-sided,
/// rescaled so the bin powers sum to the mean square of the input (the DC
/// bin keeps any residual mean).
inline PowerSpectrum welch_psd(std::span<const double> series, const WelchConfig& cfg) {
  cfg.validate(series.size());
  auto acc = detail::welch_accumulate(series, series, cfg);
  const double scale = detail::rescale_factor(mean_square(series), acc.auto_a);
  PowerSpectrum out;
  out.grid = FrequencyGrid::one_sided(cfg.segment_length);
  out.power.resize(acc.auto_a.size());
  for (std::size_t j = 0; j < out.power.size(); ++j) out.power[j] = acc.auto_a[j] * scale;
  return out;
}

/// Welch cross spectrum with the same segmentation, window and scaling
/// conventions as welch_psd. welch_cpsd(a, a) equals welch_psd(a) with zero
/// imaginary part.
inline CrossSpectrum welch_cpsd(std::span<const double> a, std::span<const double> b,
                                const WelchConfig& cfg) {
  if (a.size() != b.size())
    throw ShapeError("welch_cpsd: input lengths differ (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  cfg.validate(a.size());
  auto acc = detail::welch_accumulate(a, b, cfg);
  const double sa = detail::rescale_factor(mean_square(a), acc.auto_a);
  const double sb = detail::rescale_factor(mean_square(b), acc.auto_b);
  const double scale = std::sqrt(sa) * std::sqrt(sb);
  CrossSpectrum out;
  out.grid = FrequencyGrid::one_sided(cfg.segment_length);
  out.value.resize(acc.cross.size());
  for (std::size_t j = 0; j < out.value.size(); ++j) out.value[j] = acc.cross[j] * scale;
  return out;
}

/// Magnitude-squared coherence with Tikhonov-regularized denominators,
/// clamped into [0, 1].
inline CoherenceProfile coherence(const CrossSpectrum& s_ab, const PowerSpectrum& s_aa,
                                  const PowerSpectrum& s_bb, double epsilon) {
  if (!(s_ab.grid == s_aa.grid) || !(s_ab.grid == s_bb.grid))
    throw ShapeError("coherence: spectra are not on a common frequency grid");
  if (!(epsilon > 0.0)) throw ConfigError("coherence: epsilon must be positive");
  CoherenceProfile out;
  out.grid = s_ab.grid;
  out.gamma_sq.resize(s_ab.value.size());
  for (std::size_t j = 0; j < out.gamma_sq.size(); ++j) {
    const double num = std::norm(s_ab.value[j]);
    const double den = (s_aa.power[j] + epsilon) * (s_bb.power[j] + epsilon);
    out.gamma_sq[j] = clamp01(num / den);
  }
  return out;
}

/// Stability constant used when the config does not pin one explicitly:
/// a relative floor of 1e-8 times the mean bin power of the two auto
/// spectra, never below 1e-15.
inline double resolve_epsilon(const WelchConfig& cfg, const PowerSpectrum& s_aa,
                              const PowerSpectrum& s_bb) {
  if (cfg.epsilon > 0.0) return cfg.epsilon;
  const double mean_power = 0.5 * (s_aa.mean_bin_power() + s_bb.mean_bin_power());
  return std::max(1e-15, 1e-8 * std::max(1.0, mean_power));
}

}  // namespace scpdiag
