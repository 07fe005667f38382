#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dlbsim/types.hpp"

namespace dlbsim {

// splitmix64; used to derive per-process and per-trial seeds from one global
// seed without correlated streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream) {
  std::uint64_t state = global_seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  return splitmix64(state);
}

// mt19937_64 wrapper with rejection-sampled uniform ints. The standard
// distributions are implementation-defined, which would break bit-identical
// replays across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  double unit() {  // uniform in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // `count` distinct values drawn uniformly from [0, population) \ {exclude},
  // by partial Fisher-Yates. count is clamped to population - 1.
  std::vector<ProcessId> sample_distinct(int count, int population, ProcessId exclude);

 private:
  std::mt19937_64 gen_;
};

}  // namespace dlbsim
