#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scpdiag/common.hpp"
#include "scpdiag/spectral.hpp"

// Disjoint partitions of the one-sided frequency axis [0, 0.5] into
// half-open bands; the last band additionally owns the Nyquist edge so the
// cover is exact.

namespace scpdiag {

struct Band {
  double lo = 0.0;  // inclusive
  double hi = 0.5;  // exclusive, except for the last band of a partition
};

enum class PartitionScheme { equal_width, thirds, custom };

inline const char* to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::equal_width: return "equal_width";
    case PartitionScheme::thirds: return "thirds";
    default: return "custom";
  }
}

struct BandPartition {
  std::vector<Band> bands;
  std::vector<std::string> labels;
  PartitionScheme scheme = PartitionScheme::equal_width;

  std::size_t size() const { return bands.size(); }

  /// Band owning normalized frequency f in [0, 0.5].
  std::size_t band_of(double f) const {
    for (std::size_t b = 0; b + 1 < bands.size(); ++b)
      if (f >= bands[b].lo && f < bands[b].hi) return b;
    return bands.size() - 1;
  }

  /// Per-bin band indices for a grid.
  std::vector<std::size_t> bin_map(const FrequencyGrid& grid) const {
    std::vector<std::size_t> map(grid.bin_count());
    for (std::size_t j = 0; j < map.size(); ++j) map[j] = band_of(grid.frequencies[j]);
    return map;
  }
};

inline BandPartition make_partition(PartitionScheme scheme, std::size_t band_count,
                                    std::span<const double> custom_edges = {}) {
  BandPartition p;
  p.scheme = scheme;
  if (scheme == PartitionScheme::custom) {
    if (custom_edges.size() < 2)
      throw ConfigError("make_partition: custom scheme needs at least two edges");
    constexpr double tol = 1e-12;
    if (std::abs(custom_edges.front() - 0.0) > tol || std::abs(custom_edges.back() - 0.5) > tol)
      throw ConfigError("make_partition: custom edges must run from 0 to 0.5");
    for (std::size_t i = 0; i + 1 < custom_edges.size(); ++i) {
      if (!(custom_edges[i] < custom_edges[i + 1]))
        throw ConfigError("make_partition: custom edges must be strictly increasing");
      p.bands.push_back({custom_edges[i], custom_edges[i + 1]});
    }
    p.bands.front().lo = 0.0;
    p.bands.back().hi = 0.5;
  } else {
    if (scheme == PartitionScheme::thirds) band_count = 3;
    if (band_count < 1) throw ConfigError("make_partition: band_count must be positive");
    const double width = 0.5 / static_cast<double>(band_count);
    for (std::size_t b = 0; b < band_count; ++b)
      p.bands.push_back({width * static_cast<double>(b), width * static_cast<double>(b + 1)});
    p.bands.back().hi = 0.5;
  }
  if (p.scheme == PartitionScheme::thirds) {
    p.labels = {"low", "mid", "high"};
  } else {
    for (std::size_t b = 0; b < p.bands.size(); ++b)
      p.labels.push_back("band" + std::to_string(b));
  }
  return p;
}

/// Fraction of total power falling into each band; shares sum to one.
inline std::vector<double> band_energy_shares(const PowerSpectrum& spectrum,
                                              const BandPartition& partition) {
  const double total = spectrum.total();
  if (!(total > 0.0))
    throw DataError("band_energy_shares: spectrum has zero total power");
  std::vector<double> shares(partition.size(), 0.0);
  const auto map = partition.bin_map(spectrum.grid);
  for (std::size_t j = 0; j < map.size(); ++j) shares[map[j]] += spectrum.power[j];
  for (double& s : shares) s /= total;
  return shares;
}

}  // namespace scpdiag
