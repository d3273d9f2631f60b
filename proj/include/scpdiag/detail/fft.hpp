#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

// Self-contained FFT: iterative radix-2 for power-of-two lengths plus
// Bluestein's chirp-z transform for everything else. Deterministic and
// thread-safe (no plans, no globals), which is what the instance-parallel
// callers in this library rely on.

namespace scpdiag::detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const cplx step(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

inline void fft(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (is_pow2(n)) {
    fft_pow2(a, inverse);
    return;
  }
  // Bluestein: reduce length-n DFT to a power-of-two circular convolution.
  // Chirp exponents are taken mod 2n to keep the angle argument small.
  const double sign = inverse ? 1.0 : -1.0;
  std::size_t m = 1;
  while (m < 2 * n + 1) m <<= 1;
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cplx(std::cos(ang), std::sin(ang));
  }
  std::vector<cplx> fa(m, cplx(0.0, 0.0));
  std::vector<cplx> fb(m, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = cplx(1.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
  fft_pow2(fa, false);
  fft_pow2(fb, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  fft_pow2(fa, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * chirp[k];
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

/// Forward DFT of a real signal; returns the one-sided half spectrum
/// (floor(n/2) + 1 bins, no normalization).
inline std::vector<cplx> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<cplx> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = cplx(x[i], 0.0);
  fft(a, false);
  a.resize(n / 2 + 1);
  return a;
}

/// Inverse of rfft: reconstructs a real signal of length n from its
/// one-sided half spectrum (Hermitian symmetry is imposed).
inline std::vector<double> irfft(std::span<const cplx> half, std::size_t n) {
  std::vector<cplx> a(n);
  const std::size_t h = n / 2 + 1;
  for (std::size_t j = 0; j < h && j < half.size(); ++j) a[j] = half[j];
  for (std::size_t j = h; j < n; ++j) a[j] = std::conj(a[n - j]);
  fft(a, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
  return out;
}

}  // namespace scpdiag::detail
