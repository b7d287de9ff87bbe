#include "sgdlab/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sgdlab {

namespace {

// SplitMix64 finalizer; used only to derive substream seeds.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomStream RandomStream::fork(std::uint64_t stream_id) const {
  return RandomStream(mix64(seed_ ^ mix64(stream_id)));
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
  // Bias is O(n / 2^53); negligible for the index ranges used here.
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

Vec sample_gaussian(RandomStream& rng, std::size_t d, double b) {
  if (d == 0) throw std::invalid_argument("sample_gaussian: d must be >= 1");
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw std::invalid_argument("sample_gaussian: variance b must be positive, got " +
                                std::to_string(b));
  }
  const double sd = std::sqrt(b);
  Vec y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = sd * rng.gaussian();
  return y;
}

}  // namespace sgdlab
