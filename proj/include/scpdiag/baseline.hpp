#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scpdiag/common.hpp"

// Causal FIR least-squares forecaster (Wiener approximation). The filter
// maps the most recent L available values to the next value; multi-step
// forecasts roll the filter forward on its own outputs.

namespace scpdiag {

struct FirFilter {
  std::vector<double> coefficients;  // coefficients[k] weights the value k steps back
  double ridge = 1e-6;
};

/// One training series: target[t] is regressed on input[t], input[t-1], ...
/// input[t-L+1]. For one-step-ahead self prediction pass input = s[0..n-2]
/// and target = s[1..n-1].
struct RegressionSeries {
  std::vector<double> input;
  std::vector<double> target;
};

namespace detail {

// Cholesky solve of a symmetric positive definite system; throws on a
// non-positive pivot.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                                     std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0))
      throw NumericError("fit_fir: singular normal equations (try a positive ridge)");
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
  return b;
}

}  // namespace detail

/// Ridge-regularized least-squares fit of a length-L causal filter over all
/// regression rows the given series provide. Requires at least L rows.
inline FirFilter fit_fir(std::span<const RegressionSeries> series, std::size_t length,
                         double ridge) {
  if (length < 1) throw ConfigError("fit_fir: filter length must be positive");
  if (ridge < 0.0) throw ConfigError("fit_fir: ridge must be nonnegative");

  const std::size_t L = length;
  std::vector<double> a(L * L, 0.0);
  std::vector<double> b(L, 0.0);
  std::size_t rows = 0;
  std::vector<double> row(L);
  for (const auto& s : series) {
    if (s.input.size() != s.target.size())
      throw ShapeError("fit_fir: input and target lengths differ");
    if (s.input.size() < L) continue;
    for (std::size_t t = L - 1; t < s.input.size(); ++t) {
      for (std::size_t k = 0; k < L; ++k) row[k] = s.input[t - k];
      for (std::size_t i = 0; i < L; ++i) {
        b[i] += row[i] * s.target[t];
        for (std::size_t j = 0; j <= i; ++j) a[i * L + j] += row[i] * row[j];
      }
      ++rows;
    }
  }
  if (rows < L)
    throw DataError("fit_fir: " + std::to_string(rows) + " regression rows, need at least " +
                    std::to_string(L));
  for (std::size_t i = 0; i < L; ++i) {
    a[i * L + i] += ridge;
    for (std::size_t j = i + 1; j < L; ++j) a[i * L + j] = a[j * L + i];
  }
  FirFilter f;
  f.ridge = ridge;
  f.coefficients = detail::solve_spd(std::move(a), std::move(b), L);
  return f;
}

/// Multi-step forecast by recursive rollout: each step applies the filter
/// to the most recent L values of the history extended with the forecasts
/// made so far. Values before the start of the history are treated as zero.
inline std::vector<double> predict_fir(const FirFilter& filter,
                                       std::span<const double> history,
                                       std::size_t horizon) {
  if (history.empty()) throw DataError("predict_fir: empty history");
  const std::size_t L = filter.coefficients.size();
  std::vector<double> s(history.begin(), history.end());
  s.reserve(history.size() + horizon);
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    double acc = 0.0;
    const std::size_t last = s.size();
    for (std::size_t k = 0; k < L && k < last; ++k)
      acc += filter.coefficients[k] * s[last - 1 - k];
    s.push_back(acc);
    out.push_back(acc);
  }
  return out;
}

inline std::vector<double> predict_fir(const FirFilter& filter,
                                       std::span<const double> history) {
  return predict_fir(filter, history, history.size());
}

}  // namespace scpdiag
