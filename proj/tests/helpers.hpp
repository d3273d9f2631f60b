#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "scpdiag/spectral.hpp"

// Shared test utilities. The spectral oracle below intentionally avoids the
// library FFT: it evaluates the DFT sums directly in long double so the
// Welch implementation can be checked against an independent route.

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> gaussian_series(std::size_t n, std::uint64_t seed,
                                           double sigma = 1.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(eng);
  return out;
}

inline void remove_mean(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

/// Smooth random signal: a handful of random low-frequency cosines.
inline std::vector<double> smooth_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n, 0.0);
  const int tones = 4;
  for (int t = 0; t < tones; ++t) {
    const double f = (0.5 + 3.5 * unif(eng)) / 64.0;  // low normalized frequencies
    const double phase = 2.0 * std::numbers::pi * unif(eng);
    const double amp = 0.5 + unif(eng);
    for (std::size_t i = 0; i < n; ++i)
      out[i] += amp * std::cos(2.0 * std::numbers::pi * f * static_cast<double>(i) + phase);
  }
  return out;
}

/// Direct O(N^2) DFT periodogram average with the library's documented
/// normalization (window power correction, one-sided fold, variance
/// rescale), computed in long double.
inline std::vector<double> welch_psd_oracle(std::span<const double> x,
                                            const scpdiag::WelchConfig& cfg) {
  const std::size_t L = cfg.segment_length;
  const std::size_t K = cfg.segment_count(x.size());
  const std::size_t bins = L / 2 + 1;
  const auto win = scpdiag::make_window(cfg.window, L);
  long double wss = 0.0L;
  for (double w : win) wss += static_cast<long double>(w) * w;

  std::vector<long double> acc(bins, 0.0L);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t off = k * cfg.step();
    for (std::size_t j = 0; j < bins; ++j) {
      long double re = 0.0L, im = 0.0L;
      for (std::size_t t = 0; t < L; ++t) {
        const long double ang = -2.0L * std::numbers::pi_v<long double> *
                                static_cast<long double>(j) * static_cast<long double>(t) /
                                static_cast<long double>(L);
        const long double v = static_cast<long double>(x[off + t]) * win[t];
        re += v * std::cos(ang);
        im += v * std::sin(ang);
      }
      acc[j] += re * re + im * im;
    }
  }
  const long double scale =
      1.0L / (static_cast<long double>(K) * static_cast<long double>(L) * wss);
  const bool has_nyquist = (L % 2 == 0);
  long double total = 0.0L;
  for (std::size_t j = 0; j < bins; ++j) {
    long double fold = 2.0L;
    if (j == 0 || (has_nyquist && j == bins - 1)) fold = 1.0L;
    acc[j] *= scale * fold;
    total += acc[j];
  }
  long double msq = 0.0L;
  for (double v : x) msq += static_cast<long double>(v) * v;
  msq /= static_cast<long double>(x.size());
  const long double rescale = total > 0.0L ? msq / total : 1.0L;
  std::vector<double> out(bins);
  for (std::size_t j = 0; j < bins; ++j) out[j] = static_cast<double>(acc[j] * rescale);
  return out;
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(std::abs(b[i]), 1e-300);
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

/// Direct-DFT SCP oracle: the full predictability chain (mean removal,
/// Welch auto/cross spectra, regularized coherence, residual aggregation)
/// evaluated with O(N^2) DFT sums in long double, independent of the
/// library implementation.
inline double scp_p_oracle(std::span<const double> x_in, std::span<const double> y_in,
                           const scpdiag::WelchConfig& cfg) {
  using ld = long double;
  const std::size_t n = x_in.size();
  std::vector<ld> x(x_in.begin(), x_in.end());
  std::vector<ld> y(y_in.begin(), y_in.end());
  ld mx = 0.0L, my = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<ld>(n);
  my /= static_cast<ld>(n);
  const ld delta_sq = (my - mx) * (my - mx);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] -= mx;
    y[i] -= my;
  }

  const std::size_t L = cfg.segment_length;
  const std::size_t K = cfg.segment_count(n);
  const std::size_t bins = L / 2 + 1;
  const auto win = scpdiag::make_window(cfg.window, L);
  ld wss = 0.0L;
  for (double w : win) wss += static_cast<ld>(w) * w;

  std::vector<ld> s_xx(bins, 0.0L), s_yy(bins, 0.0L), c_re(bins, 0.0L), c_im(bins, 0.0L);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t off = k * cfg.step();
    for (std::size_t j = 0; j < bins; ++j) {
      ld xr = 0.0L, xi = 0.0L, yr = 0.0L, yi = 0.0L;
      for (std::size_t t = 0; t < L; ++t) {
        const ld ang = -2.0L * std::numbers::pi_v<ld> * static_cast<ld>(j) *
                       static_cast<ld>(t) / static_cast<ld>(L);
        const ld c = std::cos(ang), s = std::sin(ang);
        const ld xv = x[off + t] * win[t];
        const ld yv = y[off + t] * win[t];
        xr += xv * c;
        xi += xv * s;
        yr += yv * c;
        yi += yv * s;
      }
      s_xx[j] += xr * xr + xi * xi;
      s_yy[j] += yr * yr + yi * yi;
      // conj(X) * Y
      c_re[j] += xr * yr + xi * yi;
      c_im[j] += xr * yi - xi * yr;
    }
  }
  const ld scale = 1.0L / (static_cast<ld>(K) * static_cast<ld>(L) * wss);
  const bool has_nyquist = (L % 2 == 0);
  ld tot_x = 0.0L, tot_y = 0.0L;
  for (std::size_t j = 0; j < bins; ++j) {
    ld fold = 2.0L;
    if (j == 0 || (has_nyquist && j == bins - 1)) fold = 1.0L;
    s_xx[j] *= scale * fold;
    s_yy[j] *= scale * fold;
    c_re[j] *= scale * fold;
    c_im[j] *= scale * fold;
    tot_x += s_xx[j];
    tot_y += s_yy[j];
  }
  ld msq_x = 0.0L, msq_y = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    msq_x += x[i] * x[i];
    msq_y += y[i] * y[i];
  }
  msq_x /= static_cast<ld>(n);
  msq_y /= static_cast<ld>(n);
  const ld rx = tot_x > 0.0L ? msq_x / tot_x : 1.0L;
  const ld ry = tot_y > 0.0L ? msq_y / tot_y : 1.0L;
  const ld rc = std::sqrt(rx) * std::sqrt(ry);
  ld mean_power = 0.0L;
  for (std::size_t j = 0; j < bins; ++j) mean_power += s_xx[j] * rx + s_yy[j] * ry;
  mean_power /= 2.0L * static_cast<ld>(bins);
  const ld eps =
      cfg.epsilon > 0.0
          ? static_cast<ld>(cfg.epsilon)
          : std::max(static_cast<ld>(1e-15), 1e-8L * std::max(static_cast<ld>(1.0), mean_power));

  ld var_y = 0.0L, mse_lb = delta_sq;
  for (std::size_t j = 0; j < bins; ++j) {
    const ld num = (c_re[j] * rc) * (c_re[j] * rc) + (c_im[j] * rc) * (c_im[j] * rc);
    const ld den = (s_xx[j] * rx + eps) * (s_yy[j] * ry + eps);
    ld g = num / den;
    if (g < 0.0L) g = 0.0L;
    if (g > 1.0L) g = 1.0L;
    var_y += s_yy[j] * ry;
    mse_lb += s_yy[j] * ry * (1.0L - g);
  }
  ld p = 1.0L - mse_lb / var_y;
  if (p < 0.0L) p = 0.0L;
  if (p > 1.0L) p = 1.0L;
  return static_cast<double>(p);
}

}  // namespace testutil
