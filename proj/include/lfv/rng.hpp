#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace lfv {

// Consumers of randomness. Each role gets its own stream so adding draws in
// one part of a simulation never perturbs another.
enum class StreamRole : std::uint32_t {
  CoalescentClock = 1,
  SubsetChoice = 2,
  BrownianIncrement = 3,
  InitialPosition = 4,
  Comparison = 5,
};

std::string_view to_string(StreamRole role);

std::uint64_t mix64(std::uint64_t z) noexcept;

// Counter-based generator: the i-th output is a fixed function of (key, i).
// Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Exponential variate with the given rate (> 0).
double exponential(Stream& rng, double rate);

// Uniform integer in [0, bound) without modulo bias (bound > 0).
std::uint64_t uniform_index(Stream& rng, std::uint64_t bound);

// Key derivation for (master seed, replicate, role).
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t replicate,
                         StreamRole role) noexcept;

inline Stream stream_for(std::uint64_t master_seed, std::uint64_t replicate,
                         StreamRole role) noexcept {
  return Stream(stream_key(master_seed, replicate, role));
}

}  // namespace lfv
