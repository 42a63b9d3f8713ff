#include "lfv/rng.hpp"

#include <cmath>

namespace lfv {

std::string_view to_string(StreamRole role) {
  switch (role) {
    case StreamRole::CoalescentClock: return "coalescent-clock";
    case StreamRole::SubsetChoice: return "subset-choice";
    case StreamRole::BrownianIncrement: return "brownian-increment";
    case StreamRole::InitialPosition: return "initial-position";
    case StreamRole::Comparison: return "comparison";
  }
  return "unknown";
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t replicate,
                         StreamRole role) noexcept {
  std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ (replicate + 0xbb67ae8584caa73bULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0x3c6ef372fe94f82bULL));
  return h;
}

double exponential(Stream& rng, double rate) {
  return -std::log(rng.uniform_open()) / rate;
}

std::uint64_t uniform_index(Stream& rng, std::uint64_t bound) {
  // Lemire's multiply-and-reject.
  __uint128_t m = static_cast<__uint128_t>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace lfv
