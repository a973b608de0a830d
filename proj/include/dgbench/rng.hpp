#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dgbench {

// Deterministic RNG built on std::mt19937_64 (whose output sequence is fixed
// by the standard) with hand-rolled variate transforms, so that results are
// reproducible across platforms and standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. No caching of the second variate: every
  // call consumes exactly two engine outputs, which keeps stream positions
  // predictable.
  double normal();

  // Uniform integer in [0, n). Rejection sampling, bias-free.
  std::size_t uniform_index(std::size_t n);

  // Index sampled according to `probs` (need not be normalized exactly;
  // a trailing remainder goes to the last index).
  std::size_t categorical(const std::vector<double>& probs);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// SplitMix64 finalizer; used to derive well-separated stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over a string, for stable purpose tags.
std::uint64_t fnv1a(std::string_view s);

// Seed for the (purpose, index) stream of a master seed. All randomness in
// the toolkit flows through this, so any trial can be recomputed in
// isolation and results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                          std::uint64_t index);

inline Rng make_stream(std::uint64_t master, std::string_view purpose,
                       std::uint64_t index) {
  return Rng(derive_seed(master, fnv1a(purpose), index));
}

}  // namespace dgbench
