#include "hopgraph/rng.hpp"

#include "hopgraph/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hopgraph {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::split(std::string_view name) const {
  return Rng(mix(key_ ^ mix(fnv1a(name))), 0);
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(mix(key_ ^ mix(index * kGolden + 0x3c6ef372fe94f82bULL)), 0);
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  require(n > 0, "Rng::uniform_int: empty range");
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  // Box-Muller, one output per pair so the stream position stays simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::poisson(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0, "Rng::poisson: rate must be finite and >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }
  // Large rates: rounded normal approximation.
  const double x = std::round(lambda + std::sqrt(lambda) * normal());
  return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
}

std::vector<int> sample_without_replacement(Rng& rng, int n_pool, int n_sample) {
  require(n_pool >= 0 && n_sample >= 0, "sample_without_replacement: negative size");
  require(n_sample <= n_pool, "sample_without_replacement: n_sample " + std::to_string(n_sample) +
                                  " exceeds pool of " + std::to_string(n_pool));
  std::vector<int> pool(static_cast<std::size_t>(n_pool));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < n_sample; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_pool - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(n_sample));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace hopgraph
