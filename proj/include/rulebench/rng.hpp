#pragma once

#include <cstdint>
#include <random>

// Deterministic draws on top of mt19937_64. std::uniform_int_distribution is
// implementation-defined, so bounded draws are done by rejection here to keep
// sampled corpora byte-identical across toolchains.

namespace rulebench {

// Unbiased value in [0, n).
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) return 0;
  std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

// Inclusive range draw.
inline std::uint64_t bounded_incl(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + bounded(rng, hi - lo + 1);
}

}  // namespace rulebench
