// SPDX-License-Identifier: Apache-2.0
//
// Per-user SINR decomposition of the received data symbol and the Monte
// Carlo ergodic-rate engine built on it. Every labeled term is the
// conditional power of that term's contribution to the received symbol,
// given the trial's channels, estimates, and filters; unit-power data
// symbols, hardware distortion, quantization noise, and thermal noise are
// marginalized in closed form, so their second moments are exact and no
// random draws are consumed during the data phase.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/channel.hpp"
#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/estimation.hpp"
#include "fdx/geometry.hpp"
#include "fdx/numeric.hpp"
#include "fdx/pilots.hpp"
#include "fdx/rng.hpp"
#include "fdx/transceivers.hpp"

namespace fdx {

// ---- SINR decomposition -----------------------------------------------------

inline constexpr int kTermCount = 10;

enum class TermKind : int {
  kIntra = 0,       // other streams of the serving cell (or CU), true channel
  kInter,           // streams of other cells (non-cooperative only)
  kUeUe,            // UL-user transmissions reaching a DL user
  kResidualSi,      // self-interference left after estimate subtraction
  kBsBs,            // downlink of other BSs reaching an uplink receiver
  kEstError,        // estimation error of the desired user's own channel
  kTxNoise,         // transmit-side distortion leaking through the SI path
  kRxDistortion,    // receive-side distortion driven by the SI aggregate
  kQuantization,    // fronthaul quantization noise (cooperative only)
  kNoise,           // thermal noise
};

inline constexpr std::array<const char*, kTermCount> kTermNames = {
    "intra",    "inter",    "ue_ue",        "residual_si",  "bs_bs",
    "est_error", "tx_noise", "rx_distortion", "quantization", "noise"};

// Contributors that exist only while the BS transmits and receives at once;
// half-duplex operation zeroes exactly these.
inline bool is_full_duplex_only(TermKind t) {
  switch (t) {
    case TermKind::kUeUe:
    case TermKind::kResidualSi:
    case TermKind::kBsBs:
    case TermKind::kTxNoise:
    case TermKind::kRxDistortion:
      return true;
    default:
      return false;
  }
}

struct SinrBreakdown {
  double desired = 0.0;
  std::array<double, kTermCount> terms{};
  double sinr = 0.0;

  double& term(TermKind t) { return terms[static_cast<int>(t)]; }
  double term(TermKind t) const { return terms[static_cast<int>(t)]; }
  double interference() const {
    double s = 0.0;
    for (double v : terms) s += v;
    return s;
  }
  // sinr = desired / sum(terms); a degenerate all-zero denominator (possible
  // only with zero noise power) reports zero rather than dividing.
  void finalize() {
    const double d = interference();
    sinr = d > 0.0 ? desired / d : 0.0;
  }
};

// Distortion levels and fronthaul capacities the decomposition needs beyond
// the channel inputs. Kept explicit so callers can evaluate counterfactuals
// without editing the config.
struct ImpairmentSpec {
  double alpha = 0.0;   // Tx-noise level, linear
  double beta = 0.0;    // Rx-distortion level, linear
  double c_dl = 0.0;    // fronthaul capacity toward the BSs, bps/Hz
  double c_ul = 0.0;    // fronthaul capacity toward the CU, bps/Hz
};

inline ImpairmentSpec impairments_from(const SystemConfig& cfg) {
  return {cfg.alpha_lin(), cfg.beta_lin(), cfg.c_dl_bpshz, cfg.c_ul_bpshz};
}

struct RateReport {
  Link link = Link::kDownlink;
  Scenario scenario = Scenario::kNonCooperative;
  Filter filter = Filter::kMf;
  std::string source;  // "monte-carlo" | "analytic" | "asymptotic"
  long trials = 0;     // Monte Carlo only

  // User (cell i, index k) sits at position i*K + k.
  std::vector<double> per_user_rate;  // bps/Hz
  std::vector<double> per_user_se;    // MC standard error of the mean; 0 otherwise
  double sum_rate = 0.0;
  double sum_rate_se = 0.0;

  SinrBreakdown breakdown_means;  // powers averaged over users (and trials)
};

namespace detail {

inline void check_consistent(const SystemConfig& cfg, const LargeScaleProfile& p,
                             const ChannelRealization& ch, const ChannelEstimate& est) {
  if (p.n != cfg.n_cells || p.m_tx != cfg.m_tx || p.m_rx != cfg.m_rx ||
      p.k_dl != cfg.k_dl || p.k_ul != cfg.k_ul)
    throw ContractError("profile dimensions do not match the configuration");
  const auto n = static_cast<std::size_t>(cfg.n_cells);
  if (ch.h_dl.size() != n || ch.h_ul.size() != n || ch.h_bs.size() != n || ch.h_ue.size() != n)
    throw ContractError("realization cell count does not match the configuration");
  if (est.dl.size() != n || est.ul.size() != n || est.si.size() != n)
    throw ContractError("estimate cell count does not match the configuration");
  for (std::size_t i = 0; i < n; ++i) {
    if (ch.h_dl[i].size() != n || est.dl[i].size() != n || est.ul[i].size() != n)
      throw ContractError("estimate/realization block layout is ragged");
    if (est.dl[i][i].rows() != cfg.m_tx || est.dl[i][i].cols() != cfg.k_dl ||
        est.ul[i][i].rows() != cfg.m_rx || est.ul[i][i].cols() != cfg.k_ul ||
        est.si[i].rows() != cfg.m_rx || est.si[i].cols() != cfg.m_tx)
      throw ContractError("estimate block dimensions do not match the configuration");
  }
}

// Precoder blocks with an explicit empty-downlink fallback: zero-column
// estimates carry no streams, so the filters degenerate to empty matrices
// (build_precoder's Gram solve cannot run on zero columns).
inline std::vector<Eigen::MatrixXcd> precoder_blocks(const ChannelEstimate& est, Filter filter,
                                                     Scenario scenario, const SystemConfig& cfg) {
  if (cfg.k_dl == 0) {
    if (scenario == Scenario::kCooperative)
      return {Eigen::MatrixXcd::Zero(cfg.m_tx * cfg.n_cells, 0)};
    return std::vector<Eigen::MatrixXcd>(cfg.n_cells, Eigen::MatrixXcd::Zero(cfg.m_tx, 0));
  }
  return build_precoder(est, filter, scenario).f;
}

// ---- Non-cooperative downlink (per-cell precoding) --------------------------

inline std::vector<SinrBreakdown> dl_terms_percell(Filter filter, const LargeScaleProfile& p,
                                                   const ChannelRealization& ch,
                                                   const ChannelEstimate& est,
                                                   [[maybe_unused]] const ImpairmentSpec& imp,
                                                   const SystemConfig& cfg, Duplex duplex) {
  const int n = cfg.n_cells, kd = cfg.k_dl;
  const double pd = cfg.p_node_mw();
  const double pu = pd;
  const double n0 = cfg.noise_mw();
  std::vector<SinrBreakdown> out(static_cast<std::size_t>(n) * kd);
  if (kd == 0) return out;
  const auto f = precoder_blocks(est, filter, Scenario::kNonCooperative, cfg);

  for (int i = 0; i < n; ++i) {
    // amp[j](k, l): amplitude stream l of BS j induces at user (i, k).
    std::vector<Eigen::MatrixXcd> amp(n);
    for (int j = 0; j < n; ++j) amp[j] = g_dl(p, ch, j, i).transpose() * f[j];
    const Eigen::MatrixXcd amp_hat = est.dl[i][i].transpose() * f[i];
    std::vector<Eigen::MatrixXcd> ue(n);
    if (duplex == Duplex::kFull && cfg.k_ul > 0)
      for (int j = 0; j < n; ++j) ue[j] = g_ue(p, ch, i, j);

    for (int k = 0; k < kd; ++k) {
      SinrBreakdown& b = out[static_cast<std::size_t>(i) * kd + k];
      const std::complex<double> a_hat = amp_hat(k, k);
      b.desired = pd * std::norm(a_hat);
      b.term(TermKind::kEstError) = pd * std::norm(amp[i](k, k) - a_hat);
      double intra = 0.0;
      for (int l = 0; l < kd; ++l)
        if (l != k) intra += std::norm(amp[i](k, l));
      b.term(TermKind::kIntra) = pd * intra;
      double inter = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) inter += amp[j].row(k).squaredNorm();
      b.term(TermKind::kInter) = pd * inter;
      if (duplex == Duplex::kFull && cfg.k_ul > 0) {
        double uu = 0.0;
        for (int j = 0; j < n; ++j) uu += ue[j].col(k).squaredNorm();
        b.term(TermKind::kUeUe) = pu * uu;
      }
      b.term(TermKind::kNoise) = n0;
      b.finalize();
    }
  }
  return out;
}

// ---- Non-cooperative uplink (per-cell detection) -----------------------------

inline std::vector<SinrBreakdown> ul_terms_percell(Filter filter, const LargeScaleProfile& p,
                                                   const ChannelRealization& ch,
                                                   const ChannelEstimate& est,
                                                   const ImpairmentSpec& imp,
                                                   const SystemConfig& cfg, Duplex duplex) {
  const int n = cfg.n_cells, ku = cfg.k_ul;
  const double pd = cfg.p_node_mw();
  const double pu = pd;
  const double n0 = cfg.noise_mw();
  std::vector<SinrBreakdown> out(static_cast<std::size_t>(n) * ku);
  if (ku == 0) return out;
  const auto w = build_detector(est, filter, Scenario::kNonCooperative).w;
  const bool fd = duplex == Duplex::kFull;
  const auto f = fd ? precoder_blocks(est, filter, Scenario::kNonCooperative, cfg)
                    : std::vector<Eigen::MatrixXcd>();

  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXcd& wi = w[i];
    std::vector<Eigen::MatrixXcd> amp(n);
    for (int j = 0; j < n; ++j) amp[j] = wi * g_ul(p, ch, i, j);
    const Eigen::MatrixXcd amp_hat = wi * est.ul[i][i];

    Eigen::MatrixXcd wr, wd;                // residual / Tx-noise amplitudes
    std::vector<Eigen::MatrixXcd> wb(n);    // BS-BS amplitudes per source BS
    Eigen::VectorXd df_row_pow;             // per-Rx-antenna own-SI drive power
    if (fd) {
      const Eigen::MatrixXcd g_si = g_bs(p, ch, i, i);
      const Eigen::MatrixXcd df = g_si * f[i];
      wr = wi * ((g_si - est.si[i]) * f[i]);
      wd = wi * df;
      df_row_pow = df.rowwise().squaredNorm();
      for (int j = 0; j < n; ++j)
        if (j != i) wb[j] = wi * (g_bs(p, ch, i, j) * f[j]);
    }

    for (int k = 0; k < ku; ++k) {
      SinrBreakdown& b = out[static_cast<std::size_t>(i) * ku + k];
      const std::complex<double> a_hat = amp_hat(k, k);
      b.desired = pu * std::norm(a_hat);
      b.term(TermKind::kEstError) = pu * std::norm(amp[i](k, k) - a_hat);
      double intra = 0.0;
      for (int l = 0; l < ku; ++l)
        if (l != k) intra += std::norm(amp[i](k, l));
      b.term(TermKind::kIntra) = pu * intra;
      double inter = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) inter += amp[j].row(k).squaredNorm();
      b.term(TermKind::kInter) = pu * inter;
      if (fd) {
        b.term(TermKind::kResidualSi) = pd * wr.row(k).squaredNorm();
        double bs = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != i) bs += wb[j].row(k).squaredNorm();
        b.term(TermKind::kBsBs) = pd * bs;
        b.term(TermKind::kTxNoise) = imp.alpha * pd * wd.row(k).squaredNorm();
        double rx = 0.0;
        for (int l = 0; l < cfg.m_rx; ++l)
          rx += std::norm(wi(k, l)) * (pd * (1.0 + imp.alpha) * df_row_pow(l) + n0);
        b.term(TermKind::kRxDistortion) = imp.beta * rx;
      }
      b.term(TermKind::kNoise) = n0 * wi.row(k).squaredNorm();
      b.finalize();
    }
  }
  return out;
}

// ---- Cooperative downlink (network precoding over the fronthaul) ------------

inline std::vector<SinrBreakdown> dl_terms_network(Filter filter, const LargeScaleProfile& p,
                                                   const ChannelRealization& ch,
                                                   const ChannelEstimate& est,
                                                   const ImpairmentSpec& imp,
                                                   const SystemConfig& cfg, Duplex duplex) {
  const int n = cfg.n_cells, kd = cfg.k_dl, mt = cfg.m_tx;
  const double pd = cfg.p_node_mw();
  const double pu = pd;
  const double n0 = cfg.noise_mw();
  std::vector<SinrBreakdown> out(static_cast<std::size_t>(n) * kd);
  if (kd == 0) return out;
  const Eigen::MatrixXcd f = precoder_blocks(est, filter, Scenario::kCooperative, cfg)[0];
  const double ps = dl_quantization(imp.c_dl, pd, 1.0).p_s;
  // Per-BS forwarding noise: the CU quantizes each BS's precoded block.
  std::vector<double> sigma2_dl(n);
  for (int j = 0; j < n; ++j)
    sigma2_dl[j] = dl_quantization(imp.c_dl, pd, f.middleRows(j * mt, mt).squaredNorm()).sigma2;

  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXcd g_net(n * mt, kd), ghat_net(n * mt, kd);
    for (int j = 0; j < n; ++j) {
      g_net.middleRows(j * mt, mt) = g_dl(p, ch, j, i);
      ghat_net.middleRows(j * mt, mt) = est.dl[j][i];
    }
    const Eigen::MatrixXcd amp = g_net.transpose() * f;  // kd x (kd n)
    std::vector<Eigen::MatrixXcd> ue(n);
    if (duplex == Duplex::kFull && cfg.k_ul > 0)
      for (int j = 0; j < n; ++j) ue[j] = g_ue(p, ch, i, j);

    for (int k = 0; k < kd; ++k) {
      const int col = i * kd + k;
      SinrBreakdown& b = out[static_cast<std::size_t>(col)];
      const std::complex<double> a_hat = (ghat_net.col(k).transpose() * f.col(col)).value();
      b.desired = ps * std::norm(a_hat);
      b.term(TermKind::kEstError) = ps * std::norm(amp(k, col) - a_hat);
      double intra = 0.0;
      for (int l = 0; l < kd; ++l)
        if (l != k) intra += std::norm(amp(k, i * kd + l));
      b.term(TermKind::kIntra) = ps * intra;
      double inter = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == i) continue;
        for (int l = 0; l < kd; ++l) inter += std::norm(amp(k, m * kd + l));
      }
      b.term(TermKind::kInter) = ps * inter;
      double quant = 0.0;
      for (int j = 0; j < n; ++j)
        quant += sigma2_dl[j] * g_net.middleRows(j * mt, mt).col(k).squaredNorm();
      b.term(TermKind::kQuantization) = quant;
      if (duplex == Duplex::kFull && cfg.k_ul > 0) {
        double uu = 0.0;
        for (int j = 0; j < n; ++j) uu += ue[j].col(k).squaredNorm();
        b.term(TermKind::kUeUe) = pu * uu;
      }
      b.term(TermKind::kNoise) = n0;
      b.finalize();
    }
  }
  return out;
}

// ---- Cooperative uplink (joint detection at the CU) --------------------------

inline std::vector<SinrBreakdown> ul_terms_network(Filter filter, const LargeScaleProfile& p,
                                                   const ChannelRealization& ch,
                                                   const ChannelEstimate& est,
                                                   const ImpairmentSpec& imp,
                                                   const SystemConfig& cfg, Duplex duplex) {
  const int n = cfg.n_cells, ku = cfg.k_ul, mt = cfg.m_tx, mr = cfg.m_rx;
  const double pd = cfg.p_node_mw();
  const double pu = pd;
  const double n0 = cfg.noise_mw();
  std::vector<SinrBreakdown> out(static_cast<std::size_t>(n) * ku);
  if (ku == 0) return out;
  const bool fd = duplex == Duplex::kFull;
  const Eigen::MatrixXcd w = build_detector(est, filter, Scenario::kCooperative).w[0];

  Eigen::MatrixXcd g_ul_net(n * mr, n * ku), ghat_ul_net(n * mr, n * ku);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      g_ul_net.block(a * mr, c * ku, mr, ku) = g_ul(p, ch, a, c);
      ghat_ul_net.block(a * mr, c * ku, mr, ku) = est.ul[a][c];
    }
  const Eigen::MatrixXcd amp = w * g_ul_net;  // (ku n) x (ku n)

  // Fronthaul loads: what each BS forwards to the CU before detection.
  std::vector<double> sigma2_ul(n);
  Eigen::MatrixXcd w_res, w_bs, w_tx;  // residual-SI / BS-BS / Tx-noise amplitudes
  Eigen::VectorXd df_row_pow = Eigen::VectorXd::Zero(n * mr);
  if (fd) {
    const Eigen::MatrixXcd f = precoder_blocks(est, filter, Scenario::kCooperative, cfg)[0];
    const double ps = dl_quantization(imp.c_dl, pd, 1.0).p_s;

    Eigen::MatrixXcd df(n * mr, f.cols()), of(n * mr, f.cols()), rf(n * mr, f.cols());
    for (int a = 0; a < n; ++a) {
      const Eigen::MatrixXcd g_diag = g_bs(p, ch, a, a);
      df.middleRows(a * mr, mr) = g_diag * f.middleRows(a * mt, mt);
      rf.middleRows(a * mr, mr) = (g_diag - est.si[a]) * f.middleRows(a * mt, mt);
      Eigen::MatrixXcd off = Eigen::MatrixXcd::Zero(mr, f.cols());
      for (int j = 0; j < n; ++j)
        if (j != a) off += g_bs(p, ch, a, j) * f.middleRows(j * mt, mt);
      of.middleRows(a * mr, mr) = off;
    }
    w_res = w * rf;
    w_bs = w * of;
    w_tx = w * df;
    df_row_pow = df.rowwise().squaredNorm();

    for (int a = 0; a < n; ++a) {
      double load = pu * g_ul_net.middleRows(a * mr, mr).squaredNorm();
      load += ps * (df.middleRows(a * mr, mr) + of.middleRows(a * mr, mr)).squaredNorm();
      const double own_drive = df.middleRows(a * mr, mr).squaredNorm();
      load += imp.alpha * ps * own_drive;
      load += imp.beta * (ps * (1.0 + imp.alpha) * own_drive + mr * n0);
      load += mr * n0;
      sigma2_ul[a] = ul_quantization(imp.c_ul, load);
    }
  } else {
    for (int a = 0; a < n; ++a) {
      const double load = pu * g_ul_net.middleRows(a * mr, mr).squaredNorm() + mr * n0;
      sigma2_ul[a] = ul_quantization(imp.c_ul, load);
    }
  }

  const double ps = dl_quantization(imp.c_dl, pd, 1.0).p_s;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < ku; ++k) {
      const int row = i * ku + k;
      SinrBreakdown& b = out[static_cast<std::size_t>(row)];
      const std::complex<double> a_hat = (w.row(row) * ghat_ul_net.col(row)).value();
      b.desired = pu * std::norm(a_hat);
      b.term(TermKind::kEstError) = pu * std::norm(amp(row, row) - a_hat);
      double intra = 0.0;
      for (int l = 0; l < ku; ++l)
        if (l != k) intra += std::norm(amp(row, i * ku + l));
      b.term(TermKind::kIntra) = pu * intra;
      double inter = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m == i) continue;
        for (int l = 0; l < ku; ++l) inter += std::norm(amp(row, m * ku + l));
      }
      b.term(TermKind::kInter) = pu * inter;
      if (fd) {
        b.term(TermKind::kResidualSi) = ps * w_res.row(row).squaredNorm();
        b.term(TermKind::kBsBs) = ps * w_bs.row(row).squaredNorm();
        b.term(TermKind::kTxNoise) = imp.alpha * ps * w_tx.row(row).squaredNorm();
        double rx = 0.0;
        for (int l = 0; l < n * mr; ++l)
          rx += std::norm(w(row, l)) * (ps * (1.0 + imp.alpha) * df_row_pow(l) + n0);
        b.term(TermKind::kRxDistortion) = imp.beta * rx;
      }
      double quant = 0.0;
      for (int a = 0; a < n; ++a)
        quant += sigma2_ul[a] * w.row(row).segment(a * mr, mr).squaredNorm();
      b.term(TermKind::kQuantization) = quant;
      b.term(TermKind::kNoise) = n0 * w.row(row).squaredNorm();
      b.finalize();
    }
  }
  return out;
}

}  // namespace detail

// Term-by-term conditional powers for every user of the requested link, given
// one realization and its estimates. Half-duplex zeroes the FD-only terms and
// recomputes the cooperative fronthaul loads without them.
inline std::vector<SinrBreakdown> instantaneous_sinr(
    Link link, Scenario scenario, Filter filter, const LargeScaleProfile& p,
    const ChannelRealization& ch, const ChannelEstimate& est, const ImpairmentSpec& imp,
    const SystemConfig& cfg, Duplex duplex = Duplex::kFull) {
  detail::check_consistent(cfg, p, ch, est);
  if (scenario == Scenario::kNonCooperative) {
    return link == Link::kDownlink
               ? detail::dl_terms_percell(filter, p, ch, est, imp, cfg, duplex)
               : detail::ul_terms_percell(filter, p, ch, est, imp, cfg, duplex);
  }
  return link == Link::kDownlink
             ? detail::dl_terms_network(filter, p, ch, est, imp, cfg, duplex)
             : detail::ul_terms_network(filter, p, ch, est, imp, cfg, duplex);
}

// ---- Monte Carlo engine ------------------------------------------------------

inline int slice_index(Scenario sc, Link link, Filter filter, Duplex duplex) {
  return (((sc == Scenario::kCooperative ? 1 : 0) * 2 + (link == Link::kUplink ? 1 : 0)) * 2 +
          (filter == Filter::kZf ? 1 : 0)) *
             2 +
         (duplex == Duplex::kHalf ? 1 : 0);
}

inline constexpr std::uint16_t kAllSlices = 0xFFFF;

// All requested (scenario, link, filter, duplex) rate reports of one Monte
// Carlo pass. Slices share the per-trial channel and pilot draws, so
// full-/half-duplex and filter comparisons are common-random-number pairs.
struct MonteCarloSet {
  Scheme scheme = Scheme::kNspt;
  long trials = 0;
  std::uint64_t seed = 0;
  std::array<std::optional<RateReport>, 16> reports;

  const RateReport& at(Scenario sc, Link link, Filter filter,
                       Duplex duplex = Duplex::kFull) const {
    const auto& r = reports[slice_index(sc, link, filter, duplex)];
    if (!r) throw ContractError("requested slice was not part of the Monte Carlo run");
    return *r;
  }
};

inline MonteCarloSet run_monte_carlo(const SystemConfig& cfg, Scheme scheme, long trials,
                                     std::uint64_t seed, std::uint16_t slice_mask = kAllSlices) {
  if (trials < 1) throw std::domain_error("trials must be >= 1");
  cfg.validate();

  const Geometry geo = place_users(cfg, seed);
  const LargeScaleProfile profile = build_profile(cfg, geo, seed);
  const PilotSet pilots = make_pilots(cfg, scheme);
  const EstimateVariances tables = estimate_variances(cfg, profile, scheme);
  const ImpairmentSpec imp = impairments_from(cfg);

  bool any_hd = false;
  for (int s = 0; s < 16; ++s)
    if (((slice_mask >> s) & 1) != 0 && (s & 1) != 0) any_hd = true;
  // Half-duplex trains without an SI slot; its estimates follow the staggered
  // pilot layout regardless of the full-duplex scheme under test.
  const bool separate_hd = any_hd && scheme == Scheme::kSpt;
  const PilotSet pilots_hd = separate_hd ? make_pilots(cfg, Scheme::kNspt) : PilotSet{};
  const EstimateVariances tables_hd =
      separate_hd ? estimate_variances(cfg, profile, Scheme::kNspt) : EstimateVariances{};

  struct SliceAcc {
    bool active = false;
    int users = 0;
    std::vector<std::vector<double>> rate;       // [user][trial]
    std::vector<double> trial_sum;               // [trial]
    std::array<std::vector<double>, kTermCount + 1> power;  // desired + terms, [trial]
  };
  std::array<SliceAcc, 16> acc;
  for (int s = 0; s < 16; ++s) {
    if (!((slice_mask >> s) & 1)) continue;
    SliceAcc& a = acc[s];
    a.active = true;
    const bool uplink = (s >> 2) & 1;
    a.users = cfg.n_cells * (uplink ? cfg.k_ul : cfg.k_dl);
    a.rate.assign(a.users, std::vector<double>(trials, 0.0));
    a.trial_sum.assign(trials, 0.0);
    for (auto& v : a.power) v.assign(trials, 0.0);
  }

  for (long t = 0; t < trials; ++t) {
    const std::uint64_t ts =
        derive_seed(seed, {static_cast<std::uint64_t>(Stream::kTrial), static_cast<std::uint64_t>(t)});
    const ChannelRealization ch = sample_channels(profile, ts);
    const ChannelEstimate est = run_pilot_phase(cfg, profile, ch, pilots, tables, ts);
    const ChannelEstimate est_hd_own =
        separate_hd ? run_pilot_phase(cfg, profile, ch, pilots_hd, tables_hd, ts)
                    : ChannelEstimate{};
    const ChannelEstimate& est_hd = separate_hd ? est_hd_own : est;

    for (int s = 0; s < 16; ++s) {
      SliceAcc& a = acc[s];
      if (!a.active) continue;
      const auto sc = (s >> 3) & 1 ? Scenario::kCooperative : Scenario::kNonCooperative;
      const auto link = (s >> 2) & 1 ? Link::kUplink : Link::kDownlink;
      const auto filter = (s >> 1) & 1 ? Filter::kZf : Filter::kMf;
      const auto duplex = s & 1 ? Duplex::kHalf : Duplex::kFull;
      const auto& e = duplex == Duplex::kHalf ? est_hd : est;
      const auto breakdowns = instantaneous_sinr(link, sc, filter, profile, ch, e, imp, cfg, duplex);

      double sum = 0.0;
      std::array<double, kTermCount + 1> pw{};
      for (int u = 0; u < a.users; ++u) {
        const double rate = std::log2(1.0 + breakdowns[u].sinr);
        a.rate[u][t] = rate;
        sum += rate;
        pw[0] += breakdowns[u].desired;
        for (int c = 0; c < kTermCount; ++c) pw[c + 1] += breakdowns[u].terms[c];
      }
      a.trial_sum[t] = sum;
      const double inv = a.users > 0 ? 1.0 / a.users : 0.0;
      for (int c = 0; c <= kTermCount; ++c) a.power[c][t] = pw[c] * inv;
    }
  }

  MonteCarloSet set;
  set.scheme = scheme;
  set.trials = trials;
  set.seed = seed;
  for (int s = 0; s < 16; ++s) {
    const SliceAcc& a = acc[s];
    if (!a.active) continue;
    RateReport rep;
    rep.scenario = (s >> 3) & 1 ? Scenario::kCooperative : Scenario::kNonCooperative;
    rep.link = (s >> 2) & 1 ? Link::kUplink : Link::kDownlink;
    rep.filter = (s >> 1) & 1 ? Filter::kZf : Filter::kMf;
    rep.source = "monte-carlo";
    rep.trials = trials;
    rep.per_user_rate.resize(a.users);
    rep.per_user_se.resize(a.users);
    for (int u = 0; u < a.users; ++u) {
      rep.per_user_rate[u] = mean(a.rate[u]);
      rep.per_user_se[u] = std_error(a.rate[u]);
    }
    rep.sum_rate = pairwise_sum(rep.per_user_rate);
    rep.sum_rate_se = std_error(a.trial_sum);
    rep.breakdown_means.desired = mean(a.power[0]);
    for (int c = 0; c < kTermCount; ++c) rep.breakdown_means.terms[c] = mean(a.power[c + 1]);
    rep.breakdown_means.finalize();
    set.reports[s] = std::move(rep);
  }
  return set;
}

// Ergodic rate of one (scenario, link, filter) slice: mean of log2(1+SINR)
// over independent channel, pilot, and impairment realizations.
inline RateReport monte_carlo_rate(const SystemConfig& cfg, Scheme scheme, Scenario scenario,
                                   Link link, Filter filter, long trials, std::uint64_t seed,
                                   Duplex duplex = Duplex::kFull) {
  const auto mask =
      static_cast<std::uint16_t>(1u << slice_index(scenario, link, filter, duplex));
  return run_monte_carlo(cfg, scheme, trials, seed, mask).at(scenario, link, filter, duplex);
}

}  // namespace fdx
