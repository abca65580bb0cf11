#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace diprime {

// SplitMix64 finalizer, used to turn arbitrary (seed, salt) pairs into
// well-mixed generator seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Every consumer derives its own child stream
// from (parent seed, salt) so that the draws made by one component never
// shift the draws seen by another. This is what makes model fits
// reproducible and lets different learners share per-node decision streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

  // Child stream keyed by salt. Derivation depends only on the construction
  // seed, never on how many draws this stream has produced.
  Rng derive(std::uint64_t salt) const {
    return Rng(mix64(seed_ ^ mix64(salt + 0x7c15b3ULL)));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits; avoids the
  // implementation-defined behaviour of std::uniform_real_distribution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1); rejects the (measure-zero) exact zero so that
  // inverse-CDF transforms never hit log(0).
  double uniform_open() {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return u;
  }

  double uniform_in(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_in: empty interval");
    return lo + (hi - lo) * uniform();
  }

  // Uniform index in {0, ..., n-1} by rejection, so every outcome is exactly
  // equally likely.
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("index: n must be positive");
    if (n == 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = gen_();
    while (r >= limit) r = gen_();
    return static_cast<std::size_t>(r % n);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Sample k distinct indices from {0,...,n-1} (k <= n), order randomized.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + index(n - i)]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

// Salts for the fixed purposes a fit needs. Using stable constants keeps
// derived streams identical across learners that share a decision point.
namespace salt {
inline constexpr std::uint64_t tree = 0x74726565;       // per-tree stream
inline constexpr std::uint64_t partition = 0x70617274;  // forest partition
inline constexpr std::uint64_t attr_sample = 0x61747472;
inline constexpr std::uint64_t attr_select = 0x73656c65;
inline constexpr std::uint64_t split_draw = 0x73706c69;
inline constexpr std::uint64_t leaf_noise = 0x6c656166;
inline constexpr std::uint64_t tie_break = 0x74696562;
}  // namespace salt

}  // namespace diprime
