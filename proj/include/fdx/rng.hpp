// SPDX-License-Identifier: Apache-2.0
//
// Seeded substream RNG: every (trial, purpose) pair gets an independent
// generator derived from the root seed, so adding trials or reordering work
// never perturbs existing draws.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace fdx {

// Named substream families. Values are part of the reproducibility contract:
// reordering them changes every derived stream.
enum class Stream : std::uint64_t {
  kPlacement = 1,
  kShadowDl = 2,
  kShadowUl = 3,
  kShadowBs = 4,
  kShadowUe = 5,
  kFadeDl = 6,
  kFadeUl = 7,
  kFadeBs = 8,
  kFadeUe = 9,
  kPilotNoiseUd = 10,
  kPilotNoiseUu = 11,
  kPilotNoiseSi = 12,
  kPilotNoiseSpt = 13,
  kPilotTxNoiseSi = 14,
  kPilotTxNoiseSpt = 15,
  kPilotRxDistSi = 16,
  kPilotRxDistSpt = 17,
  kTrial = 18,
  kGeneric = 19,
  kPilotSubErr = 20,
  kTxNoise = 21,
  kRxDistortion = 22,
  kDataSymbols = 23,
  kDataNoise = 24,
  kQuantDl = 25,
  kQuantUl = 26,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash-chains a root seed with a path of indices into one 64-bit substream id.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(root ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v));
  return h;
}

class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t root, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(root, path)) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]: keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly-symmetric complex normal, unit total variance (0.5 per part).
  std::complex<double> cnormal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-std::log(u1));
    const double ph = 2.0 * std::numbers::pi * u2;
    return {mag * std::cos(ph), mag * std::sin(ph)};
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fdx
