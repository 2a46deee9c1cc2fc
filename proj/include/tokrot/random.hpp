#pragma once

#include <cstdint>
#include <stdexcept>

namespace tokrot {

// Deterministic 64-bit stream based on splitmix64 (Steele et al.).
// This is the only random source in the repo; identical seeds give
// identical draw sequences on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RandomStream::below: bound must be positive");
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // p <= 0 and p >= 1 short-circuit without consuming a draw, so p = 0
  // pipelines are draw-free and byte-stable by construction.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return next_unit() < p;
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Substream for one record: both components pass through the splitmix64
// finalizer with distinct odd constants before combining, so neighboring
// indices land in unrelated regions of the state space.
inline RandomStream derive_substream(std::uint64_t global_seed, std::uint64_t record_index) {
  const std::uint64_t a = detail::mix64(global_seed ^ 0xA0761D6478BD642FULL);
  const std::uint64_t b = detail::mix64(record_index * 0xE7037ED1A0B428DBULL + 0x8EBC6AF09C88C6E3ULL);
  return RandomStream(detail::mix64(a ^ b));
}

// Fisher-Yates shuffle driven by an explicit stream.
template <typename RandomAccessContainer>
void shuffle_in_place(RandomAccessContainer& items, RandomStream& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace tokrot
