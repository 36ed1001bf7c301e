#pragma once

#include <array>
#include <cstdint>

namespace dd2 {

// xoshiro256** seeded through SplitMix64. Identical output on every
// platform; no dependence on <random> distribution implementations.
//
// Stream derivation: a substream for (seed, stream, index) is seeded with
//   splitmix64(seed ^ splitmix64((stream << 32) ^ index))
// so each round of a session draws from its own stream and replays stay
// stable even if an earlier round consumed a different number of draws.
class Rng {
 public:
  enum class Stream : std::uint32_t { Round = 1, Policy = 2, Service = 3 };

  explicit Rng(std::uint64_t seed);

  static Rng derive(std::uint64_t seed, Stream stream, std::uint64_t index);
  static Rng for_round(std::uint64_t session_seed, int round) {
    return derive(session_seed, Stream::Round, static_cast<std::uint64_t>(round));
  }

  std::uint64_t next();

  // [0, 1) with 53 bits of precision; one draw.
  double uniform();

  // [0, n) by multiply-shift; one draw. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t draws() const { return draws_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t draws_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dd2
