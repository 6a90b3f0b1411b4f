#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace covsim::eng {

// Deterministic per-subsystem streams derived from the scenario seed, so
// disabling one consumer (e.g. measurement noise) leaves the others intact.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x00000100000001b3ull;
  }
  return seed ^ h;
}

struct RngStreams {
  std::mt19937_64 spawner;
  std::mt19937_64 measurement;

  explicit RngStreams(std::uint64_t seed)
      : spawner(stream_seed(seed, "spawner")),
        measurement(stream_seed(seed, "measurement")) {}
};

}  // namespace covsim::eng
