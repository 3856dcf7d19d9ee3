#pragma once

#include <cmath>
#include <cstdint>

namespace sisdecay {

// Counter-based 64-bit generator (splitmix64). Each stream is keyed by
// (seed, stream id); streams advance independently, so ensemble members can
// be generated in any order or concurrently and still reproduce bitwise.
class RngStream {
 public:
  RngStream() : state_(mix(0)) {}

  RngStream(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    state_ = mix(state_ ^ stream);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      const auto wide =
          static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(bound);
      if (static_cast<std::uint64_t>(wide) >= threshold)
        return static_cast<std::uint64_t>(wide >> 64);
    }
  }

  /// Exponential waiting time with the given rate.
  double next_exponential(double rate) {
    return -std::log1p(-next_unit()) / rate;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace sisdecay
