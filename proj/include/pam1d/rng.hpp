#pragma once

#include <cstdint>
#include <limits>

namespace pam1d {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash of (seed, index, stream) used to key every random draw.
constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  return mix64(mix64(mix64(seed) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

/// Maps 64 random bits to the open interval (0,1).
constexpr double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Stateless generator: the draw for (index, stream) depends on nothing else,
/// so any site of a field can be produced on demand.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr double uniform(std::int64_t index, std::uint64_t stream) const {
    return to_unit_open(hash_key(seed_, static_cast<std::uint64_t>(index), stream));
  }
  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Sequential SplitMix64 stream, seeded from a key. Satisfies
/// UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t index) : state_(hash_key(seed, index, 0x5157)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return to_unit_open((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace pam1d
