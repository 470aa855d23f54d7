#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace scnn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; the
// mappings below avoid std::*_distribution, whose sequences are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  // Independent stream derived from (seed, stream id).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(splitmix64(seed) ^ splitmix64(stream_id * 0x9e3779b97f4a7c15ULL + 1));
  }

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Rejection-free modulo bias is
  // irrelevant at the 2^64 scale used here.
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace scnn
