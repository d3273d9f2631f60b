#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scpdiag {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad Welch parameters, malformed partitions,
/// inconsistent generator specs.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Mismatched shapes: unequal vector lengths, incompatible frequency grids.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Data problems: series too short, degenerate segmentation, zero variance,
/// empty batches, unparsable files.
class DataError : public Error {
public:
  using Error::Error;
};

/// Numerical failures: singular systems, undefined correlations.
class NumericError : public Error {
public:
  using Error::Error;
};

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population variance around the sample mean (1/N normalization).
inline double sample_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

/// Mean of squares without mean removal.
inline double mean_square(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc / static_cast<double>(v.size());
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

/// Subtracts the mean in place and returns it. Constant vectors are centered
/// to exact zeros so summation rounding cannot leave spurious residuals.
inline double remove_mean_in_place(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  if (is_constant(v)) {
    const double m = v.front();
    std::fill(v.begin(), v.end(), 0.0);
    return m;
  }
  const double m = mean(v);
  for (double& x : v) x -= m;
  return m;
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

/// splitmix64 finalizer; used to derive independent RNG streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace scpdiag
