#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <vector>

namespace tdqas {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// distributions are hand-rolled because std:: distributions are not
// bit-stable across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n); modulo bias < n / 2^64 is irrelevant here
  int uniform_int(int n) {
    assert(n > 0);
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  std::size_t uniform_index(std::size_t n) {
    assert(n > 0);
    return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // independent stream derived from the construction seed (not the draw
  // state), so child(i) is reproducible regardless of parent consumption
  Rng child(std::uint64_t stream) const {
    return Rng(splitmix64(root_ ^ splitmix64(stream + 0x9E3779B97F4A7C15ull)));
  }

  std::uint64_t root_seed() const { return root_; }

 private:
  std::uint64_t root_;
  std::mt19937_64 engine_;
};

}  // namespace tdqas
