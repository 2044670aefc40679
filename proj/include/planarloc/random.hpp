#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace planarloc {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix_seed(base);
  s = mix_seed(s ^ a);
  s = mix_seed(s ^ b);
  return mix_seed(s ^ c);
}

using Rng = std::mt19937_64;

inline int uniform_index(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// K distinct indices from [0, n), by rejection. Intended for small K.
template <std::size_t K>
std::array<int, K> sample_distinct(Rng& rng, int n) {
  std::array<int, K> out{};
  for (std::size_t i = 0; i < K; ++i) {
    while (true) {
      const int v = uniform_index(rng, n);
      bool dup = false;
      for (std::size_t j = 0; j < i; ++j) dup = dup || out[j] == v;
      if (!dup) {
        out[i] = v;
        break;
      }
    }
  }
  return out;
}

}  // namespace planarloc
