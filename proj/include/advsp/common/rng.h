#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace advsp {

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fixed by the standard, but the std distributions are not, so index and
// real-valued draws are implemented here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  size_t uniform_index(size_t n);

  // Uniform real in [0, 1) with 53 bits of precision.
  double uniform_real();

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

  // Random permutation of [0, n).
  std::vector<size_t> permutation(size_t n) {
    return sample_without_replacement(n, n);
  }

 private:
  std::mt19937_64 engine_;
};

// Derives a sub-seed for a named purpose from a run seed so independent
// consumers never share a random stream.
uint64_t derive_seed(uint64_t run_seed, std::string_view purpose,
                     uint64_t index = 0);

}  // namespace advsp
