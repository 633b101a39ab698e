// SPDX-License-Identifier: Apache-2.0
//
// Cell layout, boundary-user placement, and large-scale pathloss laws.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fdx/config.hpp"
#include "fdx/rng.hpp"

namespace fdx {

// Two users closer than this are clamped apart; the z/d^v law diverges at 0.
inline constexpr double kMinUserUserDistanceM = 1.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Geometry {
  std::vector<Vec2> bs_positions;            // [cell]
  std::vector<std::vector<Vec2>> dl_users;   // [cell][k]
  std::vector<std::vector<Vec2>> ul_users;   // [cell][u]
};

// BSs at the vertices of a regular N-gon with inter-site distance 2r
// (single BS at the origin); users uniform in angle and uniform in radius
// over the boundary annulus [(1-f) r, r].
inline Geometry place_users(const SystemConfig& config, std::uint64_t seed) {
  Geometry geo;
  const int n = config.n_cells;
  geo.bs_positions.resize(n);
  if (n == 1) {
    geo.bs_positions[0] = {0.0, 0.0};
  } else {
    // Side length 2r on a circumradius R = r / sin(pi/N).
    const double big_r = config.cell_radius_m / std::sin(std::numbers::pi / n);
    for (int i = 0; i < n; ++i) {
      const double ang = 2.0 * std::numbers::pi * i / n;
      geo.bs_positions[i] = {big_r * std::cos(ang), big_r * std::sin(ang)};
    }
  }

  geo.dl_users.resize(n);
  geo.ul_users.resize(n);
  const double r_hi = config.cell_radius_m;
  const double r_lo = (1.0 - config.boundary_fraction) * r_hi;
  for (int i = 0; i < n; ++i) {
    SubstreamRng rng(seed, {static_cast<std::uint64_t>(Stream::kPlacement),
                            static_cast<std::uint64_t>(i)});
    auto draw = [&]() {
      const double ang = 2.0 * std::numbers::pi * rng.uniform();
      const double rad = r_lo + (r_hi - r_lo) * rng.uniform();
      return Vec2{geo.bs_positions[i].x + rad * std::cos(ang),
                  geo.bs_positions[i].y + rad * std::sin(ang)};
    };
    geo.dl_users[i].reserve(config.k_dl);
    for (int k = 0; k < config.k_dl; ++k) geo.dl_users[i].push_back(draw());
    geo.ul_users[i].reserve(config.k_ul);
    for (int u = 0; u < config.k_ul; ++u) geo.ul_users[i].push_back(draw());
  }
  return geo;
}

enum class LinkKind { kUserLink, kBsBs, kSelfInterference };

// Power gain populating the large-scale D matrices. User and BS-BS links use
// the shadowed law z/d^v; the self-interference link is deterministic
// free-space (lambda/(4 pi d))^2.
inline double pathloss_gain(double distance_m, double shadow_lin, LinkKind kind,
                            const SystemConfig& config) {
  if (!(distance_m > 0.0)) throw std::domain_error("pathloss distance must be > 0");
  switch (kind) {
    case LinkKind::kSelfInterference: {
      const double x = config.wavelength_m() / (4.0 * std::numbers::pi * distance_m);
      return x * x;
    }
    default:
      return shadow_lin * std::pow(distance_m, -config.pathloss_exp);
  }
}

}  // namespace fdx
