#pragma once

// Deterministic random number generation. splitmix64 is used everywhere:
// it is trivially seedable, splittable by hashing, and produces identical
// streams on every platform (std:: distributions are implementation-defined
// and would break cross-machine reproducibility of generated instances).

#include <cstdint>
#include <vector>

namespace mfphase {

// splitmix64: Steele, Lea, Flood (2014). State advances by the golden gamma;
// each output is a finalized mix of the state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n > 0. Rejection keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Fisher-Yates; explicit so the draw sequence is pinned.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stateless mix used to derive independent sub-stream seeds (per-(cell, trial)
// seeds in the bench harness, eigensolver start vectors per frequency).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a + 0x9E3779B97F4A7C15ULL * (b + 1));
  std::uint64_t s = g.next();
  SplitMix64 h(s ^ b);
  return h.next();
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

}  // namespace mfphase
