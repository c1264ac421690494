#pragma once

#include <cstdint>
#include <random>

namespace robgan {

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Combines two 64-bit values into a new seed. Not commutative.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

/// Seedable pseudorandom stream.
///
/// Uniform draws come from the top 53 bits of a mt19937_64 engine, so a given
/// seed yields the same stream on every conforming standard library. Normal
/// draws use the Box-Muller transform; the second value of each pair is cached,
/// which makes the number of engine calls per normal draw fixed.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent sub-stream: a fresh Rng seeded from hash(seed, stream).
  /// Depends only on the seed, never on how far this stream has advanced.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  bool bernoulli(double prob) { return uniform() < prob; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

} // namespace robgan
