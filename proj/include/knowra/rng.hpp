#ifndef KNOWRA_RNG_HPP
#define KNOWRA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace knowra {

// Deterministic random source. All draws are derived from raw mt19937_64
// output so sequences are identical across platforms and standard library
// implementations (std::normal_distribution et al. are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; caches the second deviate.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_cached_) {
      has_cached_ = false;
      return mean + stddev * cached_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(theta);
    has_cached_ = true;
    return mean + stddev * radius * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace knowra

#endif  // KNOWRA_RNG_HPP
