#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace hql {

/// Mixes a master seed with a stream name and task id into a child seed.
/// Every random draw in the project descends from one master seed through
/// this function, e.g. derive_seed(master, "batch", class_id).
std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                          std::uint64_t id = 0);

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the distributions below are written out here so
/// that draws do not depend on the standard library vendor.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::string_view name, std::uint64_t id = 0)
      : engine_(derive_seed(master, name, id)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hql
