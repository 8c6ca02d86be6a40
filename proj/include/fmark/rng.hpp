#pragma once

#include <cstdint>
#include <random>

namespace fmark {

using Rng = std::mt19937_64;

/// One round of the splitmix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for stream `stream` of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

/// Fixed stream ids used across the library.
namespace streams {
inline constexpr std::uint64_t pattern = 0;
inline constexpr std::uint64_t marks = 1;
inline constexpr std::uint64_t envelope = 2;
}  // namespace streams

}  // namespace fmark
