#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vrturn {

/// Name recorded in artifact headers for the generator behind Rng.
inline constexpr std::string_view kRngName = "mt19937_64";

/// Seeded generator with portable derived distributions. The standard
/// library's distributions are implementation-defined, so everything that
/// must reproduce across toolchains goes through the helpers here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// k distinct indices from [0, n), returned in increasing order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stage seed derivation: splitmix64(master ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

}  // namespace vrturn
