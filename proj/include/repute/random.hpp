#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>
#include <algorithm>
#include <numeric>

namespace repute {

/// Deterministic random source. std::mt19937_64 has a fixed portable stream,
/// but the std distributions do not, so every mapping from raw bits to a
/// draw is implemented here. Identical seeds give identical draws on every
/// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  /// Standard normal via Box-Muller (uses the sine branch only, one draw per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::sin(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

  /// k distinct values from [0, n), uniform, via partial Fisher-Yates.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i)
      std::swap(pool[i], pool[i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)))]);
    pool.resize(k);
    return pool;
  }

  /// k distinct values from [0, n) with probability proportional to weights,
  /// by the exponential-key method: smallest -log(u)/w first.
  std::vector<int> sample_weighted(const std::vector<double>& weights, int k) {
    const int n = static_cast<int>(weights.size());
    std::vector<std::pair<double, int>> keys(n);
    for (int j = 0; j < n; ++j) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      keys[j] = {-std::log(u) / weights[j], j};
    }
    std::partial_sort(keys.begin(), keys.begin() + k, keys.end());
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) out[i] = keys[i].second;
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace repute
