// Deterministic, splittable seeding: every (seed, stream, index) work item
// gets its own engine, so parallel and serial evaluation orders produce
// identical results.
#pragma once

#include <cstdint>
#include <random>

namespace nanofiber {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a ^ (0xD1B54A32D192ED03ull * (b + 1));
  return splitmix64(state);
}

inline std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t index) {
  return std::mt19937_64(mix_seed(mix_seed(seed, stream), index));
}

}  // namespace nanofiber
