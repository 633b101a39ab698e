// SPDX-License-Identifier: Apache-2.0
//
// Large-scale gain profiles and small-scale Rayleigh realizations for the
// four channel families (BS->user, user->BS, BS->BS incl. self-interference,
// user->user), plus composition G = H .* sqrt(gain) and a binary dump format.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/geometry.hpp"
#include "fdx/rng.hpp"

namespace fdx {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

struct LargeScaleProfile {
  int n = 0, m_tx = 0, m_rx = 0, k_dl = 0, k_ul = 0;
  // d_dl[i][j][k]: BS i <-> DL user k of cell j. d_ul likewise for UL users.
  std::vector<std::vector<std::vector<double>>> d_dl;
  std::vector<std::vector<std::vector<double>>> d_ul;
  // d_bs[i][j], i != j: per-antenna-pair gain between BS i's Rx and BS j's Tx.
  std::vector<std::vector<double>> d_bs;
  // Self-interference ULA gains depend only on the Rx/Tx index offset l - m.
  std::vector<double> si_offset;  // index (l - m) + (m_tx - 1), same in every cell
  // d_ue[i][j](u, k): UL user u of cell j <-> DL user k of cell i.
  std::vector<std::vector<MatrixXd>> d_ue;

  double si_gain(int l, int m) const { return si_offset[l - m + m_tx - 1]; }
  // Row sum S_l = sum_m si_gain(l, m).
  double si_row_sum(int l) const {
    double s = 0.0;
    for (int m = 0; m < m_tx; ++m) s += si_gain(l, m);
    return s;
  }
  double si_total() const {
    double s = 0.0;
    for (int l = 0; l < m_rx; ++l) s += si_row_sum(l);
    return s;
  }
};

inline LargeScaleProfile build_profile(const SystemConfig& config, const Geometry& geo,
                                       std::uint64_t seed) {
  const int n = config.n_cells;
  LargeScaleProfile p;
  p.n = n;
  p.m_tx = config.m_tx;
  p.m_rx = config.m_rx;
  p.k_dl = config.k_dl;
  p.k_ul = config.k_ul;

  auto shadow = [&](SubstreamRng& rng) {
    return std::pow(10.0, config.shadow_db * rng.normal() / 10.0);
  };

  p.d_dl.assign(n, std::vector<std::vector<double>>(n));
  p.d_ul.assign(n, std::vector<std::vector<double>>(n));
  p.d_ue.assign(n, std::vector<MatrixXd>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      SubstreamRng rng_dl(seed, {static_cast<std::uint64_t>(Stream::kShadowDl),
                                 static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      p.d_dl[i][j].resize(config.k_dl);
      for (int k = 0; k < config.k_dl; ++k) {
        const double d = distance(geo.bs_positions[i], geo.dl_users[j][k]);
        p.d_dl[i][j][k] = pathloss_gain(d, shadow(rng_dl), LinkKind::kUserLink, config);
      }
      SubstreamRng rng_ul(seed, {static_cast<std::uint64_t>(Stream::kShadowUl),
                                 static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      p.d_ul[i][j].resize(config.k_ul);
      for (int u = 0; u < config.k_ul; ++u) {
        const double d = distance(geo.bs_positions[i], geo.ul_users[j][u]);
        p.d_ul[i][j][u] = pathloss_gain(d, shadow(rng_ul), LinkKind::kUserLink, config);
      }
      SubstreamRng rng_ue(seed, {static_cast<std::uint64_t>(Stream::kShadowUe),
                                 static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      MatrixXd& ue = p.d_ue[i][j];
      ue.resize(config.k_ul, config.k_dl);
      for (int u = 0; u < config.k_ul; ++u) {
        for (int k = 0; k < config.k_dl; ++k) {
          const double d = std::max(distance(geo.ul_users[j][u], geo.dl_users[i][k]),
                                    kMinUserUserDistanceM);
          ue(u, k) = pathloss_gain(d, shadow(rng_ue), LinkKind::kUserLink, config);
        }
      }
    }
  }

  // Symmetric shadowing per unordered BS pair.
  p.d_bs.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      SubstreamRng rng(seed, {static_cast<std::uint64_t>(Stream::kShadowBs),
                              static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      const double d = distance(geo.bs_positions[i], geo.bs_positions[j]);
      const double g = pathloss_gain(d, shadow(rng), LinkKind::kBsBs, config);
      p.d_bs[i][j] = g;
      p.d_bs[j][i] = g;
    }
  }

  // Rx element l sits at (l*spacing, 0); Tx element m at (m*spacing, gap).
  p.si_offset.resize(config.m_rx + config.m_tx - 1);
  for (int off = -(config.m_tx - 1); off <= config.m_rx - 1; ++off) {
    const double dx = off * config.bs_antenna_spacing_m;
    const double d = std::hypot(dx, config.bs_txrx_gap_m);
    p.si_offset[off + config.m_tx - 1] =
        pathloss_gain(d, 1.0, LinkKind::kSelfInterference, config);
  }
  return p;
}

struct ChannelRealization {
  // h_dl[i][j]: m_tx x k_dl; h_ul[i][j]: m_rx x k_ul; h_bs[i][j]: m_rx x m_tx
  // (i == j is the self-interference block); h_ue[i][j]: k_ul x k_dl.
  std::vector<std::vector<MatrixXcd>> h_dl, h_ul, h_bs, h_ue;
};

namespace detail {

inline MatrixXcd draw_matrix(SubstreamRng& rng, int rows, int cols) {
  MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.cnormal();
  return m;
}

}  // namespace detail

inline ChannelRealization sample_channels(const LargeScaleProfile& p, std::uint64_t seed) {
  ChannelRealization out;
  const int n = p.n;
  out.h_dl.assign(n, std::vector<MatrixXcd>(n));
  out.h_ul.assign(n, std::vector<MatrixXcd>(n));
  out.h_bs.assign(n, std::vector<MatrixXcd>(n));
  out.h_ue.assign(n, std::vector<MatrixXcd>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto ii = static_cast<std::uint64_t>(i);
      const auto jj = static_cast<std::uint64_t>(j);
      SubstreamRng r_dl(seed, {static_cast<std::uint64_t>(Stream::kFadeDl), ii, jj});
      out.h_dl[i][j] = detail::draw_matrix(r_dl, p.m_tx, p.k_dl);
      SubstreamRng r_ul(seed, {static_cast<std::uint64_t>(Stream::kFadeUl), ii, jj});
      out.h_ul[i][j] = detail::draw_matrix(r_ul, p.m_rx, p.k_ul);
      SubstreamRng r_bs(seed, {static_cast<std::uint64_t>(Stream::kFadeBs), ii, jj});
      out.h_bs[i][j] = detail::draw_matrix(r_bs, p.m_rx, p.m_tx);
      SubstreamRng r_ue(seed, {static_cast<std::uint64_t>(Stream::kFadeUe), ii, jj});
      out.h_ue[i][j] = detail::draw_matrix(r_ue, p.k_ul, p.k_dl);
    }
  }
  return out;
}

// Composed channels G = H .* sqrt(gain).

inline MatrixXcd g_dl(const LargeScaleProfile& p, const ChannelRealization& c, int i, int j) {
  MatrixXcd g = c.h_dl[i][j];
  for (int k = 0; k < p.k_dl; ++k) g.col(k) *= std::sqrt(p.d_dl[i][j][k]);
  return g;
}

inline MatrixXcd g_ul(const LargeScaleProfile& p, const ChannelRealization& c, int i, int j) {
  MatrixXcd g = c.h_ul[i][j];
  for (int u = 0; u < p.k_ul; ++u) g.col(u) *= std::sqrt(p.d_ul[i][j][u]);
  return g;
}

inline MatrixXcd g_bs(const LargeScaleProfile& p, const ChannelRealization& c, int i, int j) {
  MatrixXcd g = c.h_bs[i][j];
  if (i == j) {
    for (int l = 0; l < p.m_rx; ++l)
      for (int m = 0; m < p.m_tx; ++m) g(l, m) *= std::sqrt(p.si_gain(l, m));
  } else {
    g *= std::sqrt(p.d_bs[i][j]);
  }
  return g;
}

inline MatrixXcd g_ue(const LargeScaleProfile& p, const ChannelRealization& c, int i, int j) {
  MatrixXcd g = c.h_ue[i][j];
  for (int u = 0; u < p.k_ul; ++u)
    for (int k = 0; k < p.k_dl; ++k) g(u, k) *= std::sqrt(p.d_ue[i][j](u, k));
  return g;
}

// ---- Binary realization dump (debugging aid) -------------------------------
// Layout: magic "FDXCHAN1" | u32 version | u32 n, m_tx, m_rx, k_dl, k_ul |
// families dl, ul, bs, ue in that order, each [i][j] blocks in row-major
// (i outer, j inner), every block row-major float32 (re, im) pairs.

namespace detail {

constexpr std::array<char, 8> kDumpMagic = {'F', 'D', 'X', 'C', 'H', 'A', 'N', '1'};
constexpr std::uint32_t kDumpVersion = 1;

inline void write_block(std::ofstream& out, const MatrixXcd& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      const float re = static_cast<float>(m(r, c).real());
      const float im = static_cast<float>(m(r, c).imag());
      out.write(reinterpret_cast<const char*>(&re), sizeof(float));
      out.write(reinterpret_cast<const char*>(&im), sizeof(float));
    }
}

inline MatrixXcd read_block(std::ifstream& in, int rows, int cols) {
  MatrixXcd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      float re = 0.0f, im = 0.0f;
      in.read(reinterpret_cast<char*>(&re), sizeof(float));
      in.read(reinterpret_cast<char*>(&im), sizeof(float));
      m(r, c) = std::complex<double>(re, im);
    }
  if (!in) throw IoError("channel dump truncated");
  return m;
}

}  // namespace detail

inline void dump_realization(const ChannelRealization& c, const LargeScaleProfile& p,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dump file for writing: " + path);
  out.write(detail::kDumpMagic.data(), detail::kDumpMagic.size());
  const std::uint32_t header[6] = {
      detail::kDumpVersion,          static_cast<std::uint32_t>(p.n),
      static_cast<std::uint32_t>(p.m_tx), static_cast<std::uint32_t>(p.m_rx),
      static_cast<std::uint32_t>(p.k_dl), static_cast<std::uint32_t>(p.k_ul)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (const auto* family : {&c.h_dl, &c.h_ul, &c.h_bs, &c.h_ue})
    for (const auto& row : *family)
      for (const auto& block : row) detail::write_block(out, block);
  if (!out) throw IoError("failed writing dump file: " + path);
}

inline ChannelRealization load_realization(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dump file: " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != detail::kDumpMagic) throw IoError("not a channel dump: " + path);
  std::uint32_t header[6] = {};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] != detail::kDumpVersion) throw IoError("unsupported dump version");
  const int n = static_cast<int>(header[1]);
  const int mt = static_cast<int>(header[2]);
  const int mr = static_cast<int>(header[3]);
  const int kdl = static_cast<int>(header[4]);
  const int kul = static_cast<int>(header[5]);
  ChannelRealization c;
  c.h_dl.assign(n, std::vector<MatrixXcd>(n));
  c.h_ul.assign(n, std::vector<MatrixXcd>(n));
  c.h_bs.assign(n, std::vector<MatrixXcd>(n));
  c.h_ue.assign(n, std::vector<MatrixXcd>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.h_dl[i][j] = detail::read_block(in, mt, kdl);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.h_ul[i][j] = detail::read_block(in, mr, kul);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.h_bs[i][j] = detail::read_block(in, mr, mt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.h_ue[i][j] = detail::read_block(in, kul, kdl);
  return c;
}

}  // namespace fdx
