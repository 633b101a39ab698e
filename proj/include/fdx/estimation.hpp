// SPDX-License-Identifier: Apache-2.0
//
// Pilot-phase channel estimation: closed-form MMSE estimate/error variances
// for both pilot schemes (staggered per-family slots vs one overlapped UL+SI
// slot with estimate-then-subtract), the self-interference NMSE, and a Monte
// Carlo of the received pilot signals with per-coefficient scalar estimators.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fdx/channel.hpp"
#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/pilots.hpp"
#include "fdx/rng.hpp"

namespace fdx {

using GainTensor = std::vector<std::vector<std::vector<double>>>;

// Closed-form second-order statistics of the per-coefficient MMSE estimates.
// For every coefficient the split is exact: var_hat + var_err = true gain.
struct EstimateVariances {
  Scheme scheme = Scheme::kNspt;
  int n = 0, m_tx = 0, m_rx = 0, k_dl = 0, k_ul = 0;
  bool exact = false;  // perfect CSI: estimate == channel, zero error

  // a_* = Var[ghat], e_* = Var[g - ghat], indexed like the profile gains.
  GainTensor a_dl, e_dl;  // [i][j][k]
  GainTensor a_ul, e_ul;  // [i][j][u]

  // Self-interference tables stay in closed form: a dense M_r x M_t table is
  // wasteful at large antenna counts, and the variance depends only on the
  // Rx/Tx offset gain, the per-row Tx-noise sum S_l, and a per-cell
  // interference floor (UL pilot power reaching the overlapped slot).
  std::vector<double> si_offset;   // gain at index (l - m) + m_tx - 1
  std::vector<double> si_row_sum;  // S_l, l = 0..m_rx-1
  std::vector<double> si_floor;    // per cell; zero under staggered pilots
  double si_tau_p = 0.0;           // tau * P_d of the SI pilot slot
  double si_alpha_p = 0.0;         // alpha * P_d
  double si_beta = 0.0;
  double si_n0 = 0.0;

  double r_si(int l, int m) const { return si_offset[l - m + m_tx - 1]; }
  double v_si(int i, int l, int m) const {
    return si_floor[i] +
           (1.0 + si_beta) * (si_tau_p * r_si(l, m) + si_alpha_p * si_row_sum[l] + si_n0);
  }
  double a_si(int i, int l, int m) const {
    const double r = r_si(l, m);
    if (exact) return r;
    return si_tau_p * r * r / v_si(i, l, m);
  }
  double e_si(int i, int l, int m) const { return r_si(l, m) - a_si(i, l, m); }
  // Normalized estimation error e/r of one self-interference coefficient.
  // The leak terms are assembled directly rather than as v - tau*p*r, which
  // would cancel away most of the precision once the NMSE is small.
  double nmse_si(int i, int l, int m) const {
    if (exact) return 0.0;
    const double leaks = si_floor[i] + si_beta * si_tau_p * r_si(l, m) +
                         (1.0 + si_beta) * (si_alpha_p * si_row_sum[l] + si_n0);
    return leaks / v_si(i, l, m);
  }

  // Aggregates over all (l, m), precomputed once per cell.
  std::vector<double> si_sum_a, si_sum_e;
  double si_sum_r = 0.0;

  // Energy-weighted NMSE of the whole array, sum(e) / sum(r).
  double si_nmse_aggregate(int i) const { return si_sum_e[i] / si_sum_r; }
};

inline EstimateVariances estimate_variances(const SystemConfig& config,
                                            const LargeScaleProfile& p, Scheme scheme) {
  if (p.n != config.n_cells || p.m_tx != config.m_tx || p.m_rx != config.m_rx ||
      p.k_dl != config.k_dl || p.k_ul != config.k_ul)
    throw ContractError("profile dimensions do not match the configuration");

  const int n = p.n;
  EstimateVariances t;
  t.scheme = scheme;
  t.n = n;
  t.m_tx = p.m_tx;
  t.m_rx = p.m_rx;
  t.k_dl = p.k_dl;
  t.k_ul = p.k_ul;

  t.si_offset = p.si_offset;
  // S_l is a sliding window over the offset gains: indices [l, l + m_tx - 1].
  t.si_row_sum.assign(p.m_rx, 0.0);
  {
    std::vector<double> prefix(t.si_offset.size() + 1, 0.0);
    for (std::size_t q = 0; q < t.si_offset.size(); ++q)
      prefix[q + 1] = prefix[q] + t.si_offset[q];
    for (int l = 0; l < p.m_rx; ++l) t.si_row_sum[l] = prefix[l + p.m_tx] - prefix[l];
  }
  t.si_sum_r = 0.0;
  for (int l = 0; l < p.m_rx; ++l) t.si_sum_r += t.si_row_sum[l];

  auto shape = [&](GainTensor& g, int inner) {
    g.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(inner, 0.0)));
  };
  shape(t.a_dl, p.k_dl);
  shape(t.e_dl, p.k_dl);
  shape(t.a_ul, p.k_ul);
  shape(t.e_ul, p.k_ul);
  t.si_floor.assign(n, 0.0);
  t.si_sum_a.assign(n, 0.0);
  t.si_sum_e.assign(n, 0.0);

  if (scheme == Scheme::kPerfect) {
    t.exact = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < p.k_dl; ++k) t.a_dl[i][j][k] = p.d_dl[i][j][k];
        for (int u = 0; u < p.k_ul; ++u) t.a_ul[i][j][u] = p.d_ul[i][j][u];
      }
    for (int i = 0; i < n; ++i) t.si_sum_a[i] = t.si_sum_r;
    return t;
  }

  const double pu = config.p_node_mw();
  const double pd = pu;
  const double n0 = config.noise_mw();
  const double alpha = config.alpha_lin();
  const double beta = config.beta_lin();
  const bool overlapped = scheme == Scheme::kSpt;

  // Downlink: dedicated slot, identical for both schemes (reciprocity to the
  // Tx array). Same pilots in every cell, so the correlator output carries
  // the superposition of all cells and cross-cell estimates are proportional.
  const double tp_ud = static_cast<double>(config.tau_ud) * pu;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p.k_dl; ++k) {
      double v = n0;
      for (int j = 0; j < n; ++j) v += tp_ud * p.d_dl[i][j][k];
      for (int j = 0; j < n; ++j) {
        const double r = p.d_dl[i][j][k];
        const double a = tp_ud * r * r / v;
        t.a_dl[i][j][k] = a;
        t.e_dl[i][j][k] = r - a;
      }
    }

  // Self-interference slot (staggered: own slot; overlapped: shares the slot
  // with the UL pilots, which add a per-cell floor at the correlator output).
  t.si_tau_p = static_cast<double>(overlapped ? config.tau_max() : config.tau_si) * pd;
  t.si_alpha_p = alpha * pd;
  t.si_beta = beta;
  t.si_n0 = n0;
  if (overlapped) {
    for (int i = 0; i < n; ++i) {
      double u_tot = 0.0;
      for (int j = 0; j < n; ++j)
        for (int u = 0; u < p.k_ul; ++u) u_tot += p.d_ul[i][j][u];
      t.si_floor[i] = pu * u_tot;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!overlapped && i > 0) {
      t.si_sum_a[i] = t.si_sum_a[0];  // no floor: every cell sees the same table
    } else {
      double sum_a = 0.0;
      for (int l = 0; l < p.m_rx; ++l)
        for (int m = 0; m < p.m_tx; ++m) sum_a += t.a_si(i, l, m);
      t.si_sum_a[i] = sum_a;
    }
    t.si_sum_e[i] = t.si_sum_r - t.si_sum_a[i];
  }

  // Uplink. Staggered: dedicated slot. Overlapped: estimated from the
  // residual after subtracting the reconstructed SI pilot; the denominator
  // gains the residual-SI, Tx-noise passthrough, and distortion terms,
  // averaged over Rx antennas (the estimator applies one scalar per user).
  if (!overlapped) {
    const double tp_uu = static_cast<double>(config.tau_uu) * pu;
    for (int i = 0; i < n; ++i)
      for (int u = 0; u < p.k_ul; ++u) {
        double v = n0;
        for (int j = 0; j < n; ++j) v += tp_uu * p.d_ul[i][j][u];
        for (int j = 0; j < n; ++j) {
          const double r = p.d_ul[i][j][u];
          const double a = tp_uu * r * r / v;
          t.a_ul[i][j][u] = a;
          t.e_ul[i][j][u] = r - a;
        }
      }
  } else {
    const double tp = static_cast<double>(config.tau_max()) * pu;
    const double mr = static_cast<double>(p.m_rx);
    for (int i = 0; i < n; ++i) {
      const double base = (pd * t.si_sum_e[i] + alpha * pd * t.si_sum_r) / mr + n0 +
                          beta * ((1.0 + alpha) * pd * t.si_sum_r / mr + n0);
      for (int u = 0; u < p.k_ul; ++u) {
        double v = base;
        for (int j = 0; j < n; ++j) v += tp * p.d_ul[i][j][u];
        for (int j = 0; j < n; ++j) {
          const double r = p.d_ul[i][j][u];
          const double a = tp * r * r / v;
          t.a_ul[i][j][u] = a;
          t.e_ul[i][j][u] = r - a;
        }
      }
    }
  }
  return t;
}

// One pilot phase worth of channel estimates, every cell.
struct ChannelEstimate {
  Scheme scheme = Scheme::kNspt;
  std::vector<std::vector<MatrixXcd>> dl;  // [i][j]: m_tx x k_dl
  std::vector<std::vector<MatrixXcd>> ul;  // [i][j]: m_rx x k_ul
  std::vector<MatrixXcd> si;               // [i]: m_rx x m_tx, own cell only
};

namespace detail {

inline MatrixXcd awgn_matrix(SubstreamRng& rng, int rows, int cols, double var) {
  const double s = std::sqrt(var);
  MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = s * rng.cnormal();
  return m;
}

// Tx noise rides on the pilot matrix: entry variance alpha * |pilot entry|^2.
inline MatrixXcd tx_noise_like(SubstreamRng& rng, const MatrixXcd& pilot, double alpha) {
  const double s = std::sqrt(alpha);
  MatrixXcd m(pilot.rows(), pilot.cols());
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) m(r, c) = s * std::abs(pilot(r, c)) * rng.cnormal();
  return m;
}

// Rx distortion: per (antenna, symbol) variance beta * |driver entry|^2.
inline MatrixXcd rx_distortion_like(SubstreamRng& rng, const MatrixXcd& driver, double beta) {
  const double s = std::sqrt(beta);
  MatrixXcd m(driver.rows(), driver.cols());
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) m(r, c) = s * std::abs(driver(r, c)) * rng.cnormal();
  return m;
}

}  // namespace detail

// Simulates the received pilot signals (contamination from all cells, Tx
// noise, Rx distortion, AWGN) and applies the scalar per-coefficient MMSE
// estimators. The seed is expected to be trial-scoped already; the same seed
// reproduces the staggered-slot draws across schemes, so downlink estimates
// are common random numbers between them.
inline ChannelEstimate run_pilot_phase(const SystemConfig& config, const LargeScaleProfile& p,
                                       const ChannelRealization& ch, const PilotSet& pilots,
                                       const EstimateVariances& tables, std::uint64_t seed) {
  if (pilots.scheme != tables.scheme)
    throw ContractError("pilot set and variance tables disagree on the scheme");
  if (tables.n != p.n || tables.m_tx != p.m_tx || tables.m_rx != p.m_rx)
    throw ContractError("variance tables do not match the profile");

  const int n = p.n;
  ChannelEstimate est;
  est.scheme = tables.scheme;
  est.dl.assign(n, std::vector<MatrixXcd>(n));
  est.ul.assign(n, std::vector<MatrixXcd>(n));
  est.si.resize(n);

  if (tables.scheme == Scheme::kPerfect) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        est.dl[i][j] = g_dl(p, ch, i, j);
        est.ul[i][j] = g_ul(p, ch, i, j);
      }
      est.si[i] = g_bs(p, ch, i, i);
    }
    return est;
  }

  const double pu = config.p_node_mw();
  const double pd = pu;
  const double n0 = config.noise_mw();
  const double alpha = config.alpha_lin();
  const double beta = config.beta_lin();
  const bool overlapped = tables.scheme == Scheme::kSpt;
  const auto id = [](Stream s) { return static_cast<std::uint64_t>(s); };

  // Downlink slot (shared by both schemes).
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::uint64_t>(i);
    for (int j = 0; j < n; ++j) est.dl[i][j].resize(p.m_tx, p.k_dl);
    if (p.k_dl == 0) continue;
    MatrixXcd y = MatrixXcd::Zero(p.m_tx, config.tau_ud);
    for (int c = 0; c < n; ++c) y += g_dl(p, ch, i, c) * pilots.phi_ud.transpose();
    y *= std::sqrt(static_cast<double>(config.tau_ud) * pu);
    SubstreamRng rng(seed, {id(Stream::kPilotNoiseUd), ii});
    y += detail::awgn_matrix(rng, p.m_tx, config.tau_ud, n0);
    const MatrixXcd corr = y * pilots.phi_ud.conjugate();
    const double amp = std::sqrt(static_cast<double>(config.tau_ud) * pu);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < p.k_dl; ++k)
        est.dl[i][j].col(k) = (tables.a_dl[i][j][k] / (amp * p.d_dl[i][j][k])) * corr.col(k);
  }

  if (!overlapped) {
    // Uplink slot.
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::uint64_t>(i);
      for (int j = 0; j < n; ++j) est.ul[i][j].resize(p.m_rx, p.k_ul);
      if (p.k_ul > 0) {
        MatrixXcd y = MatrixXcd::Zero(p.m_rx, config.tau_uu);
        for (int c = 0; c < n; ++c) y += g_ul(p, ch, i, c) * pilots.phi_uu.transpose();
        y *= std::sqrt(static_cast<double>(config.tau_uu) * pu);
        SubstreamRng rng(seed, {id(Stream::kPilotNoiseUu), ii});
        y += detail::awgn_matrix(rng, p.m_rx, config.tau_uu, n0);
        const MatrixXcd corr = y * pilots.phi_uu.conjugate();
        const double amp = std::sqrt(static_cast<double>(config.tau_uu) * pu);
        for (int j = 0; j < n; ++j)
          for (int u = 0; u < p.k_ul; ++u)
            est.ul[i][j].col(u) = (tables.a_ul[i][j][u] / (amp * p.d_ul[i][j][u])) * corr.col(u);
      }
    }
    // Self-interference slot.
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::uint64_t>(i);
      SubstreamRng rng_psi(seed, {id(Stream::kPilotTxNoiseSi), ii});
      const MatrixXcd psi = detail::tx_noise_like(rng_psi, pilots.phi_si, alpha);
      const MatrixXcd gsi = g_bs(p, ch, i, i);
      MatrixXcd ybar = std::sqrt(tables.si_tau_p) * gsi * (pilots.phi_si + psi).transpose();
      SubstreamRng rng_n(seed, {id(Stream::kPilotNoiseSi), ii});
      ybar += detail::awgn_matrix(rng_n, p.m_rx, config.tau_si, n0);
      SubstreamRng rng_d(seed, {id(Stream::kPilotRxDistSi), ii});
      const MatrixXcd y = ybar + detail::rx_distortion_like(rng_d, ybar, beta);
      const MatrixXcd corr = y * pilots.phi_si.conjugate();
      est.si[i].resize(p.m_rx, p.m_tx);
      const double amp = std::sqrt(tables.si_tau_p);
      for (int m = 0; m < p.m_tx; ++m)
        for (int l = 0; l < p.m_rx; ++l)
          est.si[i](l, m) = (tables.a_si(i, l, m) / (amp * p.si_gain(l, m))) * corr(l, m);
    }
    return est;
  }

  // Overlapped slot: UL pilots and the SI pilot share tau_max symbols.
  const int tau = pilots.tau_max;
  const double amp_si = std::sqrt(tables.si_tau_p);
  const double amp_ul = std::sqrt(static_cast<double>(tau) * pu);
  for (int i = 0; i < n; ++i) {
    const auto ii = static_cast<std::uint64_t>(i);
    SubstreamRng rng_psi(seed, {id(Stream::kPilotTxNoiseSpt), ii});
    const MatrixXcd psi = detail::tx_noise_like(rng_psi, pilots.phi_si, alpha);
    const MatrixXcd gsi = g_bs(p, ch, i, i);
    // Distortion driver: the locally transmitted pilot plus thermal noise;
    // the far-field UL pilots are orders of magnitude below it.
    MatrixXcd ybar = amp_si * gsi * (pilots.phi_si + psi).transpose();
    SubstreamRng rng_n(seed, {id(Stream::kPilotNoiseSpt), ii});
    ybar += detail::awgn_matrix(rng_n, p.m_rx, tau, n0);
    MatrixXcd y = ybar;
    if (p.k_ul > 0) {
      MatrixXcd ul_part = MatrixXcd::Zero(p.m_rx, tau);
      for (int c = 0; c < n; ++c) ul_part += g_ul(p, ch, i, c) * pilots.phi_uu.transpose();
      y += amp_ul * ul_part;
    }
    SubstreamRng rng_d(seed, {id(Stream::kPilotRxDistSpt), ii});
    y += detail::rx_distortion_like(rng_d, ybar, beta);

    // Stage 1: the reported SI estimate comes straight from the correlator.
    const MatrixXcd corr_si = y * pilots.phi_si.conjugate();
    est.si[i].resize(p.m_rx, p.m_tx);
    for (int m = 0; m < p.m_tx; ++m)
      for (int l = 0; l < p.m_rx; ++l)
        est.si[i](l, m) = (tables.a_si(i, l, m) / (amp_si * p.si_gain(l, m))) * corr_si(l, m);

    // Stage 2: subtract the reconstructed SI pilot and estimate UL from the
    // residual. The subtracted reconstruction realizes the estimate as
    // kappa*g plus an independent error draw: reusing the stage-1 output
    // would re-inject its in-slot leakage and (whenever the SI pilot spans
    // the slot) cancel the UL pilots along with it, which the residual model
    // deliberately excludes.
    for (int j = 0; j < n; ++j) est.ul[i][j].resize(p.m_rx, p.k_ul);
    if (p.k_ul == 0) continue;
    SubstreamRng rng_eta(seed, {id(Stream::kPilotSubErr), ii});
    MatrixXcd gsub(p.m_rx, p.m_tx);
    for (int m = 0; m < p.m_tx; ++m)
      for (int l = 0; l < p.m_rx; ++l) {
        const double r = p.si_gain(l, m);
        const double a = tables.a_si(i, l, m);
        gsub(l, m) = (a / r) * gsi(l, m) + std::sqrt(a * (r - a) / r) * rng_eta.cnormal();
      }
    const MatrixXcd resid = y - amp_si * gsub * pilots.phi_si.transpose();
    const MatrixXcd corr_ul = resid * pilots.phi_uu.conjugate();
    for (int j = 0; j < n; ++j)
      for (int u = 0; u < p.k_ul; ++u)
        est.ul[i][j].col(u) = (tables.a_ul[i][j][u] / (amp_ul * p.d_ul[i][j][u])) * corr_ul.col(u);
  }
  return est;
}

}  // namespace fdx
