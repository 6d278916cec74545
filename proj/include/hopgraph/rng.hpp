#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace hopgraph {

/// Counter-based generator: the n-th draw is mix(key + n·γ) with the
/// SplitMix64 finalizer as the mixing function. Streams are split by hashing
/// a name (or index) into a fresh key, so data generation, parameter init and
/// sampling consume independent streams that do not perturb one another.
///
/// All derived distributions (uniform ints, normals, Poisson) are implemented
/// here rather than taken from <random>, whose distribution algorithms are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  Rng split(std::string_view name) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). Unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  std::uint64_t poisson(double lambda);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}
  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Partial Fisher-Yates: n_sample distinct values from [0, n_pool), returned
/// in ascending order.
std::vector<int> sample_without_replacement(Rng& rng, int n_pool, int n_sample);

}  // namespace hopgraph
