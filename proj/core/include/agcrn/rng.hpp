#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace agcrn {

/// Seedable generator with fully pinned-down draw mappings.
///
/// The raw stream is std::mt19937_64 (bit-exact by the standard); uniform
/// and normal draws are derived from it with fixed arithmetic instead of
/// the implementation-defined std distributions, so the same seed yields
/// the same sequence everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two raw draws per value.
  double normal();

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Seeded Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Independent generator derived from this seed and a stream tag.
  Rng fork(std::uint64_t stream) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace agcrn
