#pragma once

#include <cstdint>
#include <random>

#include "sgdlab/vec.hpp"

namespace sgdlab {

/// Seedable deterministic random stream.
///
/// The generator is fully pinned so that a seed reproduces the same sequence
/// everywhere:
///   - engine: std::mt19937_64 (the 64-bit Mersenne Twister, whose output is
///     specified exactly by the C++ standard),
///   - uniforms: the top 53 bits of each engine output mapped to [0, 1),
///   - Gaussians: Marsaglia's polar method on those uniforms (one spare value
///     is cached, so draws come in deterministic pairs).
///
/// Substreams are derived from (seed, stream_id) with a SplitMix64-style
/// mixer, never from the current engine state, so forking is a pure function
/// and parallel consumers never share state. A stream is single-owner: fork
/// it, do not share it.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Independent substream for (seed(), stream_id). Same id => same substream.
  RandomStream fork(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  double uniform();   // [0, 1), 53-bit resolution
  double gaussian();  // N(0, 1)

  /// Uniform index in [0, n). n must be >= 1.
  std::size_t uniform_index(std::size_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// d independent draws from a normal distribution with mean 0 and variance b.
Vec sample_gaussian(RandomStream& rng, std::size_t d, double b);

}  // namespace sgdlab
