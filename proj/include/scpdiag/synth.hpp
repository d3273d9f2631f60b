#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scpdiag/common.hpp"
#include "scpdiag/detail/fft.hpp"
#include "scpdiag/detail/rng.hpp"

// Synthetic multiband Gaussian process: complex Gaussian rFFT coefficients
// shaped by Gaussian bumps and inverse-transformed to a real series, plus
// band-limited additive noise targeted at one of the bumps.

namespace scpdiag {

struct MultibandSpec {
  std::size_t total_length = 2048;
  std::vector<std::size_t> peak_bins{32, 96, 192, 384};
  std::vector<double> peak_widths{6.0, 10.0, 14.0, 18.0};      // bump std, bins
  std::vector<double> peak_amplitudes{3.0, 2.0, 1.5, 1.0};
  std::uint64_t seed = 0;

  void validate() const {
    if (total_length < 2) throw ConfigError("multiband spec: total_length too small");
    if (peak_bins.size() != peak_widths.size() ||
        peak_bins.size() != peak_amplitudes.size())
      throw ConfigError("multiband spec: peak lists must have equal length");
    const std::size_t grid = total_length / 2;
    for (std::size_t i = 0; i < peak_bins.size(); ++i) {
      if (peak_bins[i] > grid)
        throw ConfigError("multiband spec: peak bin " + std::to_string(peak_bins[i]) +
                          " outside the rFFT grid");
      if (i > 0 && peak_bins[i] <= peak_bins[i - 1])
        throw ConfigError("multiband spec: peak bins must be sorted ascending");
      if (!(peak_widths[i] > 0.0))
        throw ConfigError("multiband spec: peak widths must be positive");
      if (peak_amplitudes[i] < 0.0)
        throw ConfigError("multiband spec: peak amplitudes must be nonnegative");
    }
  }
};

struct NoiseSpec {
  std::size_t target_band_index = 1;  // which peak the noise sits on
  std::vector<double> noise_levels{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t trials = 3;

  void validate(const MultibandSpec& spec) const {
    if (target_band_index >= spec.peak_bins.size())
      throw ConfigError("noise spec: target_band_index outside the peak list");
    if (trials == 0) throw ConfigError("noise spec: trials must be positive");
    if (noise_levels.empty()) throw ConfigError("noise spec: empty noise level list");
    for (std::size_t i = 0; i < noise_levels.size(); ++i) {
      if (noise_levels[i] < 0.0)
        throw ConfigError("noise spec: noise levels must be nonnegative");
      if (i > 0 && noise_levels[i] < noise_levels[i - 1])
        throw ConfigError("noise spec: noise levels must be sorted ascending");
    }
  }
};

namespace detail {

inline std::vector<double> gaussian_bump(std::size_t bins, double center, double width,
                                         double amplitude) {
  std::vector<double> bump(bins, 0.0);
  for (std::size_t j = 0; j < bins; ++j) {
    const double d = (static_cast<double>(j) - center) / width;
    bump[j] = amplitude * std::exp(-0.5 * d * d);
  }
  return bump;
}

// Real series whose rFFT coefficients are iid complex standard Gaussians
// shaped by the given amplitude profile. Two normals are drawn per bin in
// fixed order; DC and Nyquist keep only the real draw.
inline std::vector<double> shaped_gaussian_series(std::span<const double> profile,
                                                  std::size_t total_length,
                                                  std::uint64_t seed) {
  const std::size_t bins = total_length / 2 + 1;
  GaussianSampler normal(seed);
  std::vector<cplx> coef(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    const double re = normal();
    const double im = normal();
    const bool real_bin = (j == 0) || (total_length % 2 == 0 && j == bins - 1);
    coef[j] = real_bin ? cplx(profile[j] * re, 0.0)
                       : cplx(profile[j] * re, profile[j] * im);
  }
  return irfft(coef, total_length);
}

// One-sided variance contribution of each rFFT bin of a real series.
inline std::vector<double> one_sided_power(std::span<const double> series) {
  const std::size_t n = series.size();
  const auto spec = rfft(series);
  std::vector<double> p(spec.size());
  const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t j = 0; j < spec.size(); ++j) {
    double fold = 2.0;
    if (j == 0 || (n % 2 == 0 && j == spec.size() - 1)) fold = 1.0;
    p[j] = std::norm(spec[j]) * inv * fold;
  }
  return p;
}

}  // namespace detail

/// Deterministic multiband Gaussian process of length spec.total_length;
/// the output is mean-removed.
inline std::vector<double> generate_multiband_gp(const MultibandSpec& spec) {
  spec.validate();
  const std::size_t bins = spec.total_length / 2 + 1;
  std::vector<double> profile(bins, 0.0);
  for (std::size_t i = 0; i < spec.peak_bins.size(); ++i) {
    const auto bump = detail::gaussian_bump(bins, static_cast<double>(spec.peak_bins[i]),
                                            spec.peak_widths[i], spec.peak_amplitudes[i]);
    for (std::size_t j = 0; j < bins; ++j) profile[j] += bump[j];
  }
  auto series = detail::shaped_gaussian_series(profile, spec.total_length, spec.seed);
  const double m = mean(series);
  for (double& v : series) v -= m;
  return series;
}

/// Adds an independent Gaussian series shaped by the target peak's bump.
/// The noise variance equals level times the clean series' energy within
/// +-3 widths of the peak; level 0 returns the input unchanged.
inline std::vector<double> add_bandlimited_noise(std::span<const double> series,
                                                 const MultibandSpec& spec,
                                                 const NoiseSpec& noise, double level,
                                                 std::uint64_t seed) {
  spec.validate();
  noise.validate(spec);
  if (level < 0.0) throw ConfigError("add_bandlimited_noise: level must be nonnegative");
  if (series.size() != spec.total_length)
    throw ShapeError("add_bandlimited_noise: series length does not match the spec");
  std::vector<double> out(series.begin(), series.end());
  if (level == 0.0) return out;

  const std::size_t bins = spec.total_length / 2 + 1;
  const double center = static_cast<double>(spec.peak_bins[noise.target_band_index]);
  const double width = spec.peak_widths[noise.target_band_index];
  const auto bump = detail::gaussian_bump(bins, center, width, 1.0);

  const auto power = detail::one_sided_power(series);
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(center - 3.0 * width)));
  const auto hi = std::min(bins - 1, static_cast<std::size_t>(std::ceil(center + 3.0 * width)));
  double band_energy = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) band_energy += power[j];

  auto raw = detail::shaped_gaussian_series(bump, spec.total_length, seed);
  const double raw_var = sample_variance(raw);
  if (!(raw_var > 0.0) || !(band_energy > 0.0)) return out;
  const double gain = std::sqrt(level * band_energy / raw_var);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += gain * raw[i];
  return out;
}

}  // namespace scpdiag
