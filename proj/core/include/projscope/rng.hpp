#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace projscope {

/// SplitMix64 finalizer; the mixing step behind every derived seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a hash of a string, used to fold names into seed derivation.
std::uint64_t hash_string(std::string_view s) noexcept;

/// Derive an independent stream seed from a master seed and a counter path.
/// derive_seed(m, {a, b}) == derive_seed(derive_seed(m, {a}), {b}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Seeded random stream. Wraps mt19937_64 (whose output sequence is fixed by the
/// standard) and implements the distributions itself so results do not depend
/// on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n), in sampling order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace projscope
