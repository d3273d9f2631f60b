#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace scpdiag::detail {

// Seeded standard-normal sampler: mt19937_64 plus an explicit Box-Muller
// transform. std::normal_distribution is implementation-defined, so the
// transform is written out to keep generated series identical across
// standard libraries.
class GaussianSampler {
public:
  explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  // uniform in (0, 1]; never zero so the log above is finite
  double next_unit() {
    const std::uint64_t bits = eng_() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace scpdiag::detail
