#include "advsp/common/rng.h"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace advsp {

size_t Rng::uniform_index(size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const uint64_t bound = static_cast<uint64_t>(n);
  // Reject the low residue so the modulo is unbiased.
  const uint64_t threshold = (0 - bound) % bound;
  uint64_t x = engine_();
  while (x < threshold) x = engine_();
  return static_cast<size_t>(x % bound);
}

double Rng::uniform_real() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<size_t> pool(n);
  std::iota(pool.begin(), pool.end(), size_t{0});
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + uniform_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t run_seed, std::string_view purpose,
                     uint64_t index) {
  return splitmix64(splitmix64(run_seed ^ fnv1a64(purpose)) + index);
}

}  // namespace advsp
