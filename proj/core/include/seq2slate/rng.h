#ifndef SEQ2SLATE_RNG_H_
#define SEQ2SLATE_RNG_H_

#include <cstdint>
#include <vector>

namespace seq2slate {

/// Deterministic pseudo-random generator: xoshiro256++ seeded through
/// splitmix64. The algorithm is fixed (not the platform default) so that a
/// given seed yields the same stream on every machine, which the
/// reproducibility contracts of training and click simulation rely on.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  /// Uniform double in [0, 1), 53 bits of randomness.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (one spare cached).
  double normal();

  /// Unbiased integer in [0, n); n must be > 0. Uses rejection sampling.
  uint64_t below(uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Independent generator derived from this one's seed and a salt.
  /// Deterministic: does not consume state from this stream.
  Rng derive(uint64_t salt) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_ = 0;
  uint64_t state_[4] = {};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace seq2slate

#endif  // SEQ2SLATE_RNG_H_
