#pragma once

// Portable seeded randomness. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; all derived draws (integers, reals,
// normals, shuffles) are implemented here so results do not depend on the
// standard library's distribution implementations.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace nlx {

// Independent purposes get independent substreams of one experiment seed.
enum class Stream : std::uint64_t {
  Schema = 1,
  Explanation,
  Examples,
  Noise,
  Split,
  Subset,
  Perturb,
  Init,
  Pool,
  Dataset,
  Partition,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng derive(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nlx
