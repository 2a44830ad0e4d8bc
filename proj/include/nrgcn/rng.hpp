#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace nrgcn {

// Counter-based splitmix64 stream. Identical seed + identical call
// sequence gives identical output on every platform, which std::mt19937
// plus std distributions do not guarantee.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : state_(seed) {}

  // Stream for one node, independent of the order nodes are visited.
  static RandomSource for_node(std::uint64_t seed, std::uint64_t node_id) {
    return RandomSource(seed ^ mix(node_id + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Unbiased draw in [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-a, a).
  double next_symmetric(double a) { return (2.0 * next_unit() - 1.0) * a; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

  // k distinct elements of pool, uniform without replacement, clamped to
  // the pool size. Result sorted when sort_result is set.
  std::vector<int> sample_without_replacement(std::vector<int> pool,
                                              std::size_t k,
                                              bool sort_result = true) {
    const std::size_t take = std::min(k, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(pool[i], pool[i + next_below(pool.size() - i)]);
    }
    pool.resize(take);
    if (sort_result) std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace nrgcn
