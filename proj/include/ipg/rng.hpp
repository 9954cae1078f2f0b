// Seed splitting: every random stream in the pipeline is derived from the
// master seed and a (kind, a, b) label, so workers never share a stream and
// any parallel schedule reproduces the sequential run.
#pragma once

#include <cstdint>
#include <random>

namespace ipg {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : uint64_t {
  WorldUser = 1,
  WorldItem = 2,
  CollectPolicy = 3,
  CollectClick = 4,
  Targets = 5,
  TrainInit = 6,
  TrainShuffle = 7,
  GuidePolicy = 8,
  GuideClick = 9,
};

// Split rule: seed = splitmix64 chained over (master, kind, a, b).
// Click streams are keyed by user id only, never by policy or target, so the
// feedback noise is paired across policies of the same run.
inline std::mt19937_64 make_stream(uint64_t master, Stream kind, uint64_t a = 0,
                                   uint64_t b = 0) {
  uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<uint64_t>(kind));
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return std::mt19937_64(s);
}

}  // namespace ipg
