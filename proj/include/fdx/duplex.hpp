// SPDX-License-Identifier: Apache-2.0
#pragma once
// Full- vs half-duplex trade: pilot-overhead bookkeeping, the per-link and
// joint reliable-region inequalities, their closed-form sufficiency bounds,
// and the shared-draw sum-rate ratio.
//
// Rates entering these checks are per-symbol spectral efficiencies without
// any overhead discount; the overhead weights are applied here. The
// half-duplex baseline splits the slot evenly between the two links, which
// is where the factor 2 on the full-duplex side comes from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fdx/analytic.hpp"
#include "fdx/channel.hpp"
#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/estimation.hpp"
#include "fdx/geometry.hpp"
#include "fdx/rate.hpp"

namespace fdx {

// Pilot/data split of one coherence interval for a duplex comparison.
struct OverheadModel {
  double tau_fd = 0.0;         // pilot symbols consumed by the full-duplex scheme
  double tau_hd = 0.0;         // pilot symbols for the time-division baseline
  double total_symbols = 0.0;  // symbols per coherence interval
  double symbol_s = 1.0;       // seconds per symbol

  void validate() const {
    if (!(tau_fd > 0.0) || !(tau_hd > 0.0))
      throw ValidationError("pilot overheads must be positive");
    if (!(total_symbols > tau_fd) || !(total_symbols > tau_hd))
      throw ValidationError("total_symbols must exceed both pilot overheads");
    if (!(symbol_s > 0.0)) throw ValidationError("symbol duration must be positive");
  }
};

inline OverheadModel make_overheads(const SystemConfig& cfg, Scheme scheme) {
  OverheadModel o;
  o.tau_fd = static_cast<double>(cfg.tau_fd(scheme));
  o.tau_hd = static_cast<double>(cfg.tau_hd());
  o.total_symbols = static_cast<double>(cfg.total_symbols);
  o.symbol_s = cfg.symbol_duration_s.value_or(1.0);
  o.validate();
  return o;
}

// Outcome of the reliable-region inequalities for one scenario/filter pair.
struct RegionVerdict {
  bool dl_holds = false, ul_holds = false, joint_holds = false;
  // Overhead-weighted left minus right side of each inequality, bps/Hz.
  double dl_margin = 0.0, ul_margin = 0.0, joint_margin = 0.0;
  // Smallest valid slot length (seconds) at which every condition holds with
  // the given rates; +infinity when doubling the full-duplex slot can never
  // compensate (twice the FD sum-rate still below the HD sum-rate).
  double t_cohe_min_s = std::numeric_limits<double>::infinity();
  // Interference headroom per link from the closed-form sufficiency bounds;
  // populated by lemma_bounds, NaN in verdicts from the direct check.
  double max_tolerable_dl = std::numeric_limits<double>::quiet_NaN();
  double max_tolerable_ul = std::numeric_limits<double>::quiet_NaN();
};

// Per-user SINRs of one link under full duplex and under the baseline.
struct DuplexSinrs {
  std::vector<double> fd;
  std::vector<double> hd;
};

// Invert per-user rates back to SINRs for the bound evaluations.
inline DuplexSinrs duplex_sinrs_from(const RateReport& fd, const RateReport& hd) {
  if (fd.link != hd.link || fd.per_user_rate.size() != hd.per_user_rate.size())
    throw ContractError("duplex_sinrs_from: reports describe different user sets");
  DuplexSinrs s;
  s.fd.reserve(fd.per_user_rate.size());
  s.hd.reserve(hd.per_user_rate.size());
  for (double r : fd.per_user_rate) s.fd.push_back(std::exp2(r) - 1.0);
  for (double r : hd.per_user_rate) s.hd.push_back(std::exp2(r) - 1.0);
  return s;
}

namespace detail {

inline void check_region_reports(const RateReport& fd_dl, const RateReport& fd_ul,
                                 const RateReport& hd_dl, const RateReport& hd_ul) {
  if (fd_dl.link != Link::kDownlink || hd_dl.link != Link::kDownlink ||
      fd_ul.link != Link::kUplink || hd_ul.link != Link::kUplink)
    throw ContractError("region check: reports bound to the wrong links");
  if (fd_dl.scenario != fd_ul.scenario || fd_dl.scenario != hd_dl.scenario ||
      fd_dl.scenario != hd_ul.scenario)
    throw ContractError("region check: reports mix scenarios");
  if (fd_dl.filter != fd_ul.filter || fd_dl.filter != hd_dl.filter ||
      fd_dl.filter != hd_ul.filter)
    throw ContractError("region check: reports mix filters");
  if (fd_dl.per_user_rate.size() != hd_dl.per_user_rate.size() ||
      fd_ul.per_user_rate.size() != hd_ul.per_user_rate.size())
    throw ContractError("region check: reports describe different user sets");
}

// Smallest T with 2(1 - tau_fd/T) a >= (1 - tau_hd/T) b, or +infinity.
inline double slot_threshold(double a, double b, const OverheadModel& o) {
  if (!(2.0 * a > b)) return std::numeric_limits<double>::infinity();
  const double t = (2.0 * o.tau_fd * a - o.tau_hd * b) / (2.0 * a - b);
  // The comparison is only meaningful on slots that fit both pilot blocks.
  return std::max({t, o.tau_fd, o.tau_hd});
}

}  // namespace detail

// Per-link and joint slot-discounted comparison of full duplex against the
// even-split baseline: 2(1 - tau_FD/T) sum R_FD >= (1 - tau_HD/T) sum R_HD.
inline RegionVerdict reliable_region_check(const RateReport& fd_dl, const RateReport& fd_ul,
                                           const RateReport& hd_dl, const RateReport& hd_ul,
                                           const OverheadModel& overheads) {
  overheads.validate();
  detail::check_region_reports(fd_dl, fd_ul, hd_dl, hd_ul);
  const double wf = 2.0 * (1.0 - overheads.tau_fd / overheads.total_symbols);
  const double wh = 1.0 - overheads.tau_hd / overheads.total_symbols;

  RegionVerdict v;
  v.dl_margin = wf * fd_dl.sum_rate - wh * hd_dl.sum_rate;
  v.ul_margin = wf * fd_ul.sum_rate - wh * hd_ul.sum_rate;
  v.joint_margin = wf * (fd_dl.sum_rate + fd_ul.sum_rate) -
                   wh * (hd_dl.sum_rate + hd_ul.sum_rate);
  v.dl_holds = v.dl_margin >= 0.0;
  v.ul_holds = v.ul_margin >= 0.0;
  v.joint_holds = v.joint_margin >= 0.0;
  const double t_dl = detail::slot_threshold(fd_dl.sum_rate, hd_dl.sum_rate, overheads);
  const double t_ul = detail::slot_threshold(fd_ul.sum_rate, hd_ul.sum_rate, overheads);
  v.t_cohe_min_s = overheads.symbol_s * std::max(t_dl, t_ul);
  return v;
}

// Closed-form sufficiency bounds on the interference a full-duplex slot may
// add before the region collapses, plus the minimum coherence time.
//
// Both schemes and links reduce to the same per-user test
//   2 (T - tau_FD) SINR_FD >= (T - tau_link) SINR_HD,
// with tau_link the baseline pilot block of that link alone. max_tolerable_dl
// is the admissible full-duplex interference as a fraction of the
// pre-existing downlink interference (estimation quality is pilot-layout
// independent there, so the fraction is closed form). The uplink bound under
// split-pilot training depends on the realized SINRs, so max_tolerable_ul is
// the worst-user headroom as a fraction of the realized denominator.
inline RegionVerdict lemma_bounds(Scheme scheme, const SystemConfig& cfg,
                                  const DuplexSinrs& ul_sinrs) {
  if (scheme != Scheme::kNspt && scheme != Scheme::kSpt)
    throw ContractError("lemma_bounds: bounds are defined for the pilot schemes only");
  if (ul_sinrs.fd.size() != ul_sinrs.hd.size() || ul_sinrs.fd.empty())
    throw ContractError("lemma_bounds: mismatched per-user SINR lists");
  const OverheadModel o = make_overheads(cfg, scheme);
  const double t = o.total_symbols;
  const double tau_si = cfg.tau_si, tau_uu = cfg.tau_uu, tau_ud = cfg.tau_ud;

  RegionVerdict v;
  v.max_tolerable_dl = (t - 2.0 * (o.tau_fd - tau_ud) - tau_ud) / (t - tau_ud);

  double t_cohe_symbols;
  if (scheme == Scheme::kNspt) {
    v.max_tolerable_ul = (t - 2.0 * (tau_si + tau_ud) - tau_uu) / (t - tau_uu);
    t_cohe_symbols = std::max(2.0 * (tau_si + tau_uu) + tau_ud,
                              2.0 * (tau_si + tau_ud) + tau_uu);
  } else {
    // Split-pilot uplink: headroom and slot floor follow the realized SINRs.
    const double c = 2.0 * (t - o.tau_fd) / (t - tau_uu);
    double headroom = std::numeric_limits<double>::infinity();
    double t_max_ul = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < ul_sinrs.fd.size(); ++k) {
      const double sf = ul_sinrs.fd[k], sh = ul_sinrs.hd[k];
      headroom = std::min(headroom, sh > 0.0 ? c * sf / sh - 1.0
                                             : std::numeric_limits<double>::infinity());
      if (2.0 * sf > sh)
        t_max_ul = std::max(t_max_ul, (2.0 * o.tau_fd * sf - o.tau_hd * sh) / (2.0 * sf - sh));
      else
        finite = false;  // doubling the slot share can never compensate
    }
    v.max_tolerable_ul = headroom;
    t_cohe_symbols = finite ? std::max(2.0 * cfg.tau_max() + tau_ud, t_max_ul)
                            : std::numeric_limits<double>::infinity();
  }
  v.t_cohe_min_s = o.symbol_s * t_cohe_symbols;
  v.dl_holds = v.max_tolerable_dl > 0.0;
  v.ul_holds = v.max_tolerable_ul > 0.0;
  v.joint_holds = v.dl_holds && v.ul_holds;
  return v;
}

// Worst-user multiplicative slack of the sufficiency test above across both
// links: every user satisfies its bound iff the result is >= 0, and a value
// of m means the full-duplex SINRs could shrink by 1/(1+m) before any bound
// breaks. Negative infinity when the slot is below the scheme's floor.
inline double lemma_slack(Scheme scheme, const SystemConfig& cfg, const DuplexSinrs& dl_sinrs,
                          const DuplexSinrs& ul_sinrs) {
  const OverheadModel o = make_overheads(cfg, scheme);
  const RegionVerdict bounds = lemma_bounds(scheme, cfg, ul_sinrs);
  if (!(o.symbol_s * o.total_symbols >= bounds.t_cohe_min_s))
    return -std::numeric_limits<double>::infinity();
  const double t = o.total_symbols;
  auto link_slack = [&](const DuplexSinrs& s, double tau_link) {
    const double c = 2.0 * (t - o.tau_fd) / (t - tau_link);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.fd.size(); ++k) {
      if (!(s.hd[k] > 0.0)) continue;  // an idle baseline user constrains nothing
      worst = std::min(worst, c * s.fd[k] / s.hd[k] - 1.0);
    }
    return worst;
  };
  if (dl_sinrs.fd.size() != dl_sinrs.hd.size())
    throw ContractError("lemma_slack: mismatched per-user SINR lists");
  return std::min(link_slack(dl_sinrs, cfg.tau_ud), link_slack(ul_sinrs, cfg.tau_uu));
}

// Baseline rate with the transmit-while-receive terms removed. Estimation
// quality matches orthogonal-in-time training, so the non-split pilot layout
// is used regardless of the full-duplex scheme under comparison. trials = 0
// evaluates the closed forms instead of simulating.
inline RateReport half_duplex_rate(const SystemConfig& cfg, Scenario scenario, Link link,
                                   Filter filter, long trials, std::uint64_t seed) {
  if (trials > 0)
    return monte_carlo_rate(cfg, Scheme::kNspt, scenario, link, filter, trials, seed,
                            Duplex::kHalf);
  const LargeScaleProfile p = build_profile(cfg, place_users(cfg, seed), seed);
  const EstimateVariances v = estimate_variances(cfg, p, Scheme::kNspt);
  return analytic_rate(cfg, p, v, scenario, link, filter, Duplex::kHalf);
}

// Throughput ratio against the even-split baseline for a shared user set;
// approaches 2 when every transmit-while-receive impairment vanishes.
inline double fd_hd_ratio(const RateReport& fd_dl, const RateReport& fd_ul,
                          const RateReport& hd_dl, const RateReport& hd_ul) {
  detail::check_region_reports(fd_dl, fd_ul, hd_dl, hd_ul);
  const double fd = fd_dl.sum_rate + fd_ul.sum_rate;
  const double hd = 0.5 * (hd_dl.sum_rate + hd_ul.sum_rate);
  if (hd == 0.0)
    return fd == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                     : std::numeric_limits<double>::infinity();
  return fd / hd;
}

}  // namespace fdx
