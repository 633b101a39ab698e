// SPDX-License-Identifier: Apache-2.0
//
// Parameter sweeps over one system dimension: metric evaluation, preset
// experiment recipes, and the CSV/JSON row schema shared by every CLI
// subcommand.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdx/analytic.hpp"
#include "fdx/config.hpp"
#include "fdx/duplex.hpp"
#include "fdx/errors.hpp"
#include "fdx/estimation.hpp"
#include "fdx/geometry.hpp"
#include "fdx/rate.hpp"

namespace fdx {

// ---- Sweep vocabulary ----------------------------------------------------

// Swept dimension. M and K move both sides of the antenna / user split
// (m_tx = m_rx = M, k_dl = k_ul = K) and C moves both fronthaul capacities,
// matching how the headline experiments vary them.
enum class SweepAxis { kM, kK, kT, kPRef, kCellRadius, kC };

enum class SweepMetric {
  kSumRateMc,
  kSumRateAnalytic,
  kNmse,
  kFdHdRatio,
  kCoopNoncoopRatio,
  kRegionVerdict,
  kRequiredPower,
};

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kM: return "M";
    case SweepAxis::kK: return "K";
    case SweepAxis::kT: return "T";
    case SweepAxis::kPRef: return "P_r";
    case SweepAxis::kCellRadius: return "cell_radius";
    default: return "C";
  }
}

inline const char* to_string(SweepMetric m) {
  switch (m) {
    case SweepMetric::kSumRateMc: return "sum_rate_mc";
    case SweepMetric::kSumRateAnalytic: return "sum_rate_analytic";
    case SweepMetric::kNmse: return "nmse";
    case SweepMetric::kFdHdRatio: return "fd_hd_ratio";
    case SweepMetric::kCoopNoncoopRatio: return "coop_noncoop_ratio";
    case SweepMetric::kRegionVerdict: return "region_verdict";
    default: return "required_power";
  }
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "M") return SweepAxis::kM;
  if (s == "K") return SweepAxis::kK;
  if (s == "T") return SweepAxis::kT;
  if (s == "P_r") return SweepAxis::kPRef;
  if (s == "cell_radius") return SweepAxis::kCellRadius;
  if (s == "C") return SweepAxis::kC;
  throw ValidationError("axis must be one of M|K|T|P_r|cell_radius|C, got \"" + s + "\"");
}

inline SweepMetric parse_metric(const std::string& s) {
  if (s == "sum_rate_mc") return SweepMetric::kSumRateMc;
  if (s == "sum_rate_analytic") return SweepMetric::kSumRateAnalytic;
  if (s == "nmse") return SweepMetric::kNmse;
  if (s == "fd_hd_ratio") return SweepMetric::kFdHdRatio;
  if (s == "coop_noncoop_ratio") return SweepMetric::kCoopNoncoopRatio;
  if (s == "region_verdict") return SweepMetric::kRegionVerdict;
  if (s == "required_power") return SweepMetric::kRequiredPower;
  throw ValidationError("unknown output metric \"" + s + "\"");
}

// One extra pass over the axis with config overrides, e.g. a cell-radius
// family on an NMSE-vs-power sweep. The label rides in the scenario column,
// so variants are restricted to metrics that leave that column free.
struct SweepVariant {
  std::string label;
  nlohmann::json fixed = nlohmann::json::object();
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::kM;
  std::vector<double> values;                     // strictly monotone, non-empty
  nlohmann::json fixed = nlohmann::json::object();  // SystemConfig overrides
  std::vector<SweepMetric> outputs;
  std::vector<Scheme> schemes = {Scheme::kNspt};
  std::vector<Scenario> scenarios = {Scenario::kNonCooperative, Scenario::kCooperative};
  std::vector<Filter> filters = {Filter::kMf, Filter::kZf};
  std::vector<SweepVariant> variants;  // empty = one unlabeled pass
  long trials = 2000;                  // 0 = closed forms only
  double target_rate_bpshz = 0.1;      // required_power goal per user

  void validate() const {
    if (values.empty()) throw ValidationError("sweep values must be non-empty");
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
      inc = inc && values[i] > values[i - 1];
      dec = dec && values[i] < values[i - 1];
    }
    if (!inc && !dec) throw ValidationError("sweep values must be strictly monotone");
    if (axis == SweepAxis::kM || axis == SweepAxis::kK || axis == SweepAxis::kT) {
      for (double v : values)
        if (v != std::floor(v) || std::abs(v) > 1e9)
          throw ValidationError(std::string(to_string(axis)) + " values must be integers");
    }
    if (axis == SweepAxis::kC) {
      for (double v : values)
        if (!(v > 0.0)) throw ValidationError("C values must be > 0");
    }
    if (!fixed.is_object()) throw ValidationError("fixed must be an object");
    if (outputs.empty()) throw ValidationError("outputs must be non-empty");
    for (std::size_t i = 0; i < outputs.size(); ++i)
      for (std::size_t j = i + 1; j < outputs.size(); ++j)
        if (outputs[i] == outputs[j])
          throw ValidationError(std::string("duplicate output metric ") + to_string(outputs[i]));
    if (schemes.empty()) throw ValidationError("schemes must be non-empty");
    if (scenarios.empty()) throw ValidationError("scenarios must be non-empty");
    if (filters.empty()) throw ValidationError("filters must be non-empty");
    if (trials < 0) throw ValidationError("trials must be >= 0");
    for (SweepMetric m : outputs)
      if (m == SweepMetric::kSumRateMc && trials == 0)
        throw ValidationError("sum_rate_mc requires trials >= 1");
    if (!(target_rate_bpshz > 0.0)) throw ValidationError("target_rate_bpshz must be > 0");
    if (!variants.empty()) {
      std::set<std::string> labels;
      for (const SweepVariant& v : variants) {
        if (v.label.empty() || v.label == "-")
          throw ValidationError("variant labels must be non-empty");
        if (!v.fixed.is_object()) throw ValidationError("variant fixed must be an object");
        if (!labels.insert(v.label).second)
          throw ValidationError("duplicate variant label \"" + v.label + "\"");
      }
      for (SweepMetric m : outputs)
        if (m != SweepMetric::kNmse)
          throw ValidationError(std::string("variants require scenario-free outputs; ") +
                                to_string(m) + " uses the scenario column");
    }
  }
};

inline SweepSpec load_sweep_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("sweep document must be an object");
  static const std::set<std::string> known = {
      "axis",    "values",   "fixed",    "outputs", "schemes",
      "scenarios", "filters", "variants", "trials",  "target_rate_bpshz"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("unknown field: " + it.key());
  }
  for (const char* field : {"axis", "values", "outputs"}) {
    if (!doc.contains(field)) throw ValidationError(std::string(field) + " missing");
  }

  SweepSpec s;
  const auto& axis = doc.at("axis");
  if (!axis.is_string()) throw ValidationError("axis must be a string");
  s.axis = parse_axis(axis.get<std::string>());

  const auto& values = doc.at("values");
  if (!values.is_array()) throw ValidationError("values must be an array of numbers");
  for (const auto& v : values) {
    if (!v.is_number()) throw ValidationError("values must be an array of numbers");
    s.values.push_back(v.get<double>());
  }

  if (doc.contains("fixed")) {
    if (!doc.at("fixed").is_object()) throw ValidationError("fixed must be an object");
    s.fixed = doc.at("fixed");
  }

  auto string_list = [](const nlohmann::json& j, const char* key, auto parse, auto& out) {
    if (!j.at(key).is_array()) throw ValidationError(std::string(key) + " must be an array of strings");
    out.clear();
    for (const auto& e : j.at(key)) {
      if (!e.is_string()) throw ValidationError(std::string(key) + " must be an array of strings");
      out.push_back(parse(e.get<std::string>()));
    }
  };
  string_list(doc, "outputs", parse_metric, s.outputs);
  if (doc.contains("schemes")) string_list(doc, "schemes", parse_scheme, s.schemes);
  if (doc.contains("scenarios")) string_list(doc, "scenarios", parse_scenario, s.scenarios);
  if (doc.contains("filters")) string_list(doc, "filters", parse_filter, s.filters);

  if (doc.contains("variants")) {
    const auto& vs = doc.at("variants");
    if (!vs.is_array()) throw ValidationError("variants must be an array of objects");
    for (const auto& e : vs) {
      if (!e.is_object() || !e.contains("label") || !e.at("label").is_string())
        throw ValidationError("each variant needs a string label");
      for (auto it = e.begin(); it != e.end(); ++it)
        if (it.key() != "label" && it.key() != "fixed")
          throw ValidationError("unknown variant field: " + it.key());
      SweepVariant v;
      v.label = e.at("label").get<std::string>();
      if (e.contains("fixed")) {
        if (!e.at("fixed").is_object()) throw ValidationError("variant fixed must be an object");
        v.fixed = e.at("fixed");
      }
      s.variants.push_back(std::move(v));
    }
  }

  if (doc.contains("trials")) s.trials = detail::require_count(doc, "trials");
  if (doc.contains("target_rate_bpshz"))
    s.target_rate_bpshz = detail::require_number(doc, "target_rate_bpshz");

  s.validate();
  return s;
}

inline SweepSpec load_sweep(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("sweep document is not valid JSON");
  return load_sweep_json(doc);
}

inline SweepSpec load_sweep_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_sweep(buf.str());
}

// ---- Recipes ---------------------------------------------------------------

// Preset experiments at desk scale (antenna counts capped at 128, trial
// counts overridable from the CLI). Unknown names map to the usage error.
inline std::optional<SweepSpec> recipe(const std::string& name) {
  SweepSpec s;
  if (name == "fig3") {
    // Closed-form sum rates against the simulated ones across array sizes.
    s.axis = SweepAxis::kM;
    s.values = {16, 32, 64, 128};
    s.fixed = {{"n_cells", 3}, {"k_dl", 5},          {"k_ul", 5},
               {"p_ref_dbm", 40}, {"cell_radius_m", 2000}, {"c_dl_bpshz", 20},
               {"c_ul_bpshz", 20}};
    s.outputs = {SweepMetric::kSumRateMc, SweepMetric::kSumRateAnalytic};
  } else if (name == "fig4") {
    // Throughput ratios against the half-duplex and per-cell baselines.
    s.axis = SweepAxis::kM;
    s.values = {16, 32, 64, 128};
    s.fixed = {{"n_cells", 3}, {"k_dl", 5},          {"k_ul", 5},
               {"p_ref_dbm", 40}, {"cell_radius_m", 2000}, {"c_dl_bpshz", 20},
               {"c_ul_bpshz", 20}};
    s.outputs = {SweepMetric::kFdHdRatio, SweepMetric::kCoopNoncoopRatio};
  } else if (name == "fig5") {
    // Cooperation payoff as the fronthaul capacity grows.
    s.axis = SweepAxis::kC;
    s.values = {1, 2, 4, 6, 8, 10, 12, 16, 20, 24, 28, 32, 36, 40};
    s.fixed = {{"n_cells", 3}, {"m_tx", 128}, {"m_rx", 128},
               {"k_dl", 5},    {"k_ul", 5},   {"p_ref_dbm", 40},
               {"cell_radius_m", 2000}};
    s.outputs = {SweepMetric::kSumRateAnalytic, SweepMetric::kCoopNoncoopRatio};
    s.trials = 0;
  } else if (name == "fig6") {
    // Transmit power needed for a fixed per-user rate as the array grows.
    s.axis = SweepAxis::kM;
    s.values = {16, 32, 64, 128};
    s.fixed = {{"n_cells", 3},       {"k_dl", 1},
               {"k_ul", 1},          {"p_ref_dbm", 40},
               {"cell_radius_m", 2000}, {"total_symbols", 800},
               {"c_dl_bpshz", 20},   {"c_ul_bpshz", 20}};
    s.outputs = {SweepMetric::kRequiredPower};
    s.schemes = {Scheme::kNspt, Scheme::kSpt};
    s.trials = 0;
  } else if (name == "fig7") {
    // Self-interference estimation quality against transmit power, with a
    // cell-radius family to expose which scheme reacts to user geometry.
    s.axis = SweepAxis::kPRef;
    s.values = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    s.fixed = {{"n_cells", 3}, {"m_tx", 16},  {"m_rx", 16},
               {"k_dl", 5},    {"k_ul", 5},   {"cell_radius_m", 500},
               {"alpha_db", -50}, {"beta_db", -50}};
    s.outputs = {SweepMetric::kNmse};
    s.schemes = {Scheme::kNspt, Scheme::kSpt};
    s.variants = {{"r=500m", {{"cell_radius_m", 500}}},
                  {"r=1000m", {{"cell_radius_m", 1000}}},
                  {"r=2000m", {{"cell_radius_m", 2000}}}};
    s.trials = 0;
  } else {
    return std::nullopt;
  }
  s.validate();
  return s;
}

// ---- Row schema --------------------------------------------------------------

// One output record. String fields hold "-" and numeric fields NaN (trials:
// negative) where a column does not apply; the writers render those as "-"
// in CSV and null in JSON.
struct SweepRow {
  double axis_value = std::numeric_limits<double>::quiet_NaN();
  std::string scenario = "-";
  std::string scheme = "-";
  std::string filter = "-";
  std::string link = "-";
  std::string metric;
  double value = std::numeric_limits<double>::quiet_NaN();
  double mc_stderr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  long trials = -1;
};

inline constexpr const char* kCsvHeader =
    "axis_value,scenario,scheme,filter,link,metric,value,mc_stderr,seed,trials";

namespace detail {

// %g keeps the decimal point locale-independent as long as the process stays
// in the default "C" locale, which the tool never changes.
inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    os << detail::csv_number(r.axis_value) << ',' << r.scenario << ',' << r.scheme << ','
       << r.filter << ',' << r.link << ',' << r.metric << ','
       << detail::csv_number(r.value) << ',' << detail::csv_number(r.mc_stderr) << ','
       << r.seed << ',';
    if (r.trials < 0)
      os << '-';
    else
      os << r.trials;
    os << '\n';
  }
  if (!os) throw IoError("failed to write CSV output");
}

inline nlohmann::json rows_to_json(const std::vector<SweepRow>& rows) {
  auto cell = [](const std::string& s) {
    return s == "-" ? nlohmann::json() : nlohmann::json(s);
  };
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    nlohmann::json o;
    o["axis_value"] = num(r.axis_value);
    o["scenario"] = cell(r.scenario);
    o["scheme"] = cell(r.scheme);
    o["filter"] = cell(r.filter);
    o["link"] = cell(r.link);
    o["metric"] = r.metric;
    o["value"] = num(r.value);
    o["mc_stderr"] = num(r.mc_stderr);
    o["seed"] = r.seed;
    o["trials"] = r.trials < 0 ? nlohmann::json() : nlohmann::json(r.trials);
    arr.push_back(std::move(o));
  }
  return arr;
}

inline void write_json(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << rows_to_json(rows).dump(2) << '\n';
  if (!os) throw IoError("failed to write JSON output");
}

// ---- Metric evaluation ---------------------------------------------------

namespace detail {

inline constexpr Link kBothLinks[] = {Link::kDownlink, Link::kUplink};

inline double ratio_or_nan(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

// Slot-discounted per-user rate of one link at the configured power; the
// knob required_power searches over.
inline double discounted_per_user_rate(const SystemConfig& cfg, const LargeScaleProfile& p,
                                       Scheme scheme, Scenario sc, Link link, Filter f) {
  const EstimateVariances v = estimate_variances(cfg, p, scheme);
  const RateReport rep = analytic_rate(cfg, p, v, sc, link, f);
  if (rep.per_user_rate.empty()) return 0.0;
  const double frame =
      1.0 - static_cast<double>(cfg.tau_fd(scheme)) / static_cast<double>(cfg.total_symbols);
  return frame * rep.sum_rate / static_cast<double>(rep.per_user_rate.size());
}

// Smallest per-node transmit power (dBm) whose slot-discounted closed-form
// rate reaches the target, found by bisection over the reference power. The
// desired power and every interference term scale together, so the rate is
// nondecreasing in the reference power and saturates once interference
// dominates; an unreachable target reports NaN.
inline double required_power_dbm(const SystemConfig& base, Scheme scheme, Scenario sc,
                                 Link link, Filter f, std::uint64_t seed, double target) {
  const LargeScaleProfile p = build_profile(base, place_users(base, seed), seed);
  SystemConfig cfg = base;
  auto rate_at = [&](double p_ref_dbm) {
    cfg.p_ref_dbm = p_ref_dbm;
    return discounted_per_user_rate(cfg, p, scheme, sc, link, f);
  };
  const double node_offset = 5.0 * std::log10(static_cast<double>(base.m_tx));
  double lo = -80.0, hi = 80.0;
  if (rate_at(hi) < target) return std::numeric_limits<double>::quiet_NaN();
  if (rate_at(lo) >= target) return lo - node_offset;  // clamped at the search floor
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) >= target ? hi : lo) = mid;
  }
  return hi - node_offset;
}

// Pushes the rows of one (config, metric, scheme) evaluation. All metrics of
// one axis point share the seed, so placements and channel draws are common
// random numbers across the whole sweep.
struct RowEmitter {
  const SystemConfig& cfg;
  double axis_value;
  const std::string& variant_label;  // empty = unlabeled pass
  std::uint64_t seed;
  long trials;
  double target_rate;
  const std::vector<Scenario>& scenarios;
  const std::vector<Filter>& filters;
  std::vector<SweepRow>& rows;

  SweepRow make_row(SweepMetric metric, Scheme scheme) const {
    SweepRow r;
    r.axis_value = axis_value;
    r.scheme = to_string(scheme);
    r.metric = to_string(metric);
    r.seed = seed;
    return r;
  }

  LargeScaleProfile profile() const { return build_profile(cfg, place_users(cfg, seed), seed); }

  void emit(SweepMetric metric, Scheme scheme) {
    switch (metric) {
      case SweepMetric::kSumRateMc: sum_rate_mc(scheme); return;
      case SweepMetric::kSumRateAnalytic: sum_rate_analytic(scheme); return;
      case SweepMetric::kNmse: nmse(scheme); return;
      case SweepMetric::kFdHdRatio: fd_hd(scheme); return;
      case SweepMetric::kCoopNoncoopRatio: coop_ratio(scheme); return;
      case SweepMetric::kRegionVerdict: region(scheme); return;
      case SweepMetric::kRequiredPower: required_power(scheme); return;
    }
  }

  void sum_rate_mc(Scheme scheme) {
    std::uint16_t mask = 0;
    for (Scenario sc : scenarios)
      for (Link l : kBothLinks)
        for (Filter f : filters)
          mask = static_cast<std::uint16_t>(mask | (1u << slice_index(sc, l, f, Duplex::kFull)));
    const MonteCarloSet set = run_monte_carlo(cfg, scheme, trials, seed, mask);
    for (Scenario sc : scenarios)
      for (Link l : kBothLinks)
        for (Filter f : filters) {
          const RateReport& rep = set.at(sc, l, f);
          SweepRow r = make_row(SweepMetric::kSumRateMc, scheme);
          r.scenario = to_string(sc);
          r.filter = to_string(f);
          r.link = to_string(l);
          r.value = rep.sum_rate;
          r.mc_stderr = rep.sum_rate_se;
          r.trials = trials;
          rows.push_back(std::move(r));
        }
  }

  void sum_rate_analytic(Scheme scheme) {
    const LargeScaleProfile p = profile();
    const EstimateVariances v = estimate_variances(cfg, p, scheme);
    for (Scenario sc : scenarios)
      for (Link l : kBothLinks)
        for (Filter f : filters) {
          SweepRow r = make_row(SweepMetric::kSumRateAnalytic, scheme);
          r.scenario = to_string(sc);
          r.filter = to_string(f);
          r.link = to_string(l);
          r.value = analytic_rate(cfg, p, v, sc, l, f).sum_rate;
          rows.push_back(std::move(r));
        }
  }

  void nmse(Scheme scheme) {
    const LargeScaleProfile p = profile();
    const EstimateVariances v = estimate_variances(cfg, p, scheme);
    double acc = 0.0;
    for (int i = 0; i < cfg.n_cells; ++i) acc += v.si_nmse_aggregate(i);
    SweepRow r = make_row(SweepMetric::kNmse, scheme);
    if (!variant_label.empty()) r.scenario = variant_label;
    r.value = acc / cfg.n_cells;
    rows.push_back(std::move(r));
  }

  void fd_hd(Scheme scheme) {
    for (Scenario sc : scenarios)
      for (Filter f : filters) {
        double ratio;
        if (trials > 0) {
          std::uint16_t mask = 0;
          for (Duplex d : {Duplex::kFull, Duplex::kHalf})
            for (Link l : kBothLinks)
              mask = static_cast<std::uint16_t>(mask | (1u << slice_index(sc, l, f, d)));
          const MonteCarloSet set = run_monte_carlo(cfg, scheme, trials, seed, mask);
          ratio = fd_hd_ratio(set.at(sc, Link::kDownlink, f), set.at(sc, Link::kUplink, f),
                              set.at(sc, Link::kDownlink, f, Duplex::kHalf),
                              set.at(sc, Link::kUplink, f, Duplex::kHalf));
        } else {
          const LargeScaleProfile p = profile();
          const EstimateVariances v = estimate_variances(cfg, p, scheme);
          ratio = fd_hd_ratio(analytic_rate(cfg, p, v, sc, Link::kDownlink, f),
                              analytic_rate(cfg, p, v, sc, Link::kUplink, f),
                              half_duplex_rate(cfg, sc, Link::kDownlink, f, 0, seed),
                              half_duplex_rate(cfg, sc, Link::kUplink, f, 0, seed));
        }
        SweepRow r = make_row(SweepMetric::kFdHdRatio, scheme);
        r.scenario = to_string(sc);
        r.filter = to_string(f);
        r.value = ratio;
        if (trials > 0) r.trials = trials;
        rows.push_back(std::move(r));
      }
  }

  void coop_ratio(Scheme scheme) {
    const LargeScaleProfile p = profile();
    const EstimateVariances v = estimate_variances(cfg, p, scheme);
    for (Filter f : filters) {
      const double cd =
          analytic_rate(cfg, p, v, Scenario::kCooperative, Link::kDownlink, f).sum_rate;
      const double cu =
          analytic_rate(cfg, p, v, Scenario::kCooperative, Link::kUplink, f).sum_rate;
      const double nd =
          analytic_rate(cfg, p, v, Scenario::kNonCooperative, Link::kDownlink, f).sum_rate;
      const double nu =
          analytic_rate(cfg, p, v, Scenario::kNonCooperative, Link::kUplink, f).sum_rate;
      const double vals[] = {ratio_or_nan(cd, nd), ratio_or_nan(cu, nu),
                             ratio_or_nan(cd + cu, nd + nu)};
      const char* links[] = {to_string(Link::kDownlink), to_string(Link::kUplink), "-"};
      for (int x = 0; x < 3; ++x) {
        SweepRow r = make_row(SweepMetric::kCoopNoncoopRatio, scheme);
        r.filter = to_string(f);
        r.link = links[x];
        r.value = vals[x];
        rows.push_back(std::move(r));
      }
    }
  }

  void region(Scheme scheme) {
    const LargeScaleProfile p = profile();
    const EstimateVariances v = estimate_variances(cfg, p, scheme);
    // The baseline trains without a self-interference slot regardless of the
    // full-duplex scheme under comparison.
    const EstimateVariances v_hd = estimate_variances(cfg, p, Scheme::kNspt);
    const OverheadModel o = make_overheads(cfg, scheme);
    for (Scenario sc : scenarios)
      for (Filter f : filters) {
        const RegionVerdict verdict = reliable_region_check(
            analytic_rate(cfg, p, v, sc, Link::kDownlink, f),
            analytic_rate(cfg, p, v, sc, Link::kUplink, f),
            analytic_rate(cfg, p, v_hd, sc, Link::kDownlink, f, Duplex::kHalf),
            analytic_rate(cfg, p, v_hd, sc, Link::kUplink, f, Duplex::kHalf), o);
        const double margins[] = {verdict.dl_margin, verdict.ul_margin, verdict.joint_margin};
        const char* links[] = {to_string(Link::kDownlink), to_string(Link::kUplink), "-"};
        for (int x = 0; x < 3; ++x) {
          SweepRow r = make_row(SweepMetric::kRegionVerdict, scheme);
          r.scenario = to_string(sc);
          r.filter = to_string(f);
          r.link = links[x];
          r.value = margins[x];
          rows.push_back(std::move(r));
        }
      }
  }

  void required_power(Scheme scheme) {
    for (Scenario sc : scenarios)
      for (Filter f : filters)
        for (Link l : kBothLinks) {
          SweepRow r = make_row(SweepMetric::kRequiredPower, scheme);
          r.scenario = to_string(sc);
          r.filter = to_string(f);
          r.link = to_string(l);
          r.value = required_power_dbm(cfg, scheme, sc, l, f, seed, target_rate);
          rows.push_back(std::move(r));
        }
  }
};

inline void inject_axis(nlohmann::json& doc, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::kM:
      doc["m_tx"] = v;
      doc["m_rx"] = v;
      break;
    case SweepAxis::kK:
      doc["k_dl"] = v;
      doc["k_ul"] = v;
      break;
    case SweepAxis::kT: doc["total_symbols"] = v; break;
    case SweepAxis::kPRef: doc["p_ref_dbm"] = v; break;
    case SweepAxis::kCellRadius: doc["cell_radius_m"] = v; break;
    case SweepAxis::kC:
      doc["c_dl_bpshz"] = v;
      doc["c_ul_bpshz"] = v;
      break;
  }
}

}  // namespace detail

// Config at one axis point: base document, then sweep overrides, then the
// variant's, then the axis value; the merged document passes the full config
// validation, so pinned pilot lengths and the like fail loudly.
inline SystemConfig sweep_config_at(const SweepSpec& spec, const nlohmann::json& base,
                                    const nlohmann::json& variant_fixed, double value) {
  nlohmann::json doc = base.is_null() ? nlohmann::json::object() : base;
  if (!doc.is_object()) throw ValidationError("config document must be an object");
  doc.update(spec.fixed);
  if (!variant_fixed.is_null()) doc.update(variant_fixed);
  detail::inject_axis(doc, spec.axis, value);
  return load_config_json(doc);
}

// Evaluates the whole sweep. Rows come out in deterministic order: axis value
// (major), then variant, then the requested outputs, then scheme; every point
// reuses the root seed, so axis neighbours are common-random-number pairs.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const nlohmann::json& base,
                                       std::uint64_t seed) {
  spec.validate();
  static const SweepVariant kUnlabeled{};
  std::vector<const SweepVariant*> passes;
  if (spec.variants.empty())
    passes.push_back(&kUnlabeled);
  else
    for (const SweepVariant& v : spec.variants) passes.push_back(&v);

  std::vector<SweepRow> rows;
  for (double value : spec.values)
    for (const SweepVariant* var : passes) {
      const SystemConfig cfg = sweep_config_at(spec, base, var->fixed, value);
      detail::RowEmitter emitter{cfg,         value,        var->label,
                                 seed,        spec.trials,  spec.target_rate_bpshz,
                                 spec.scenarios, spec.filters, rows};
      for (SweepMetric metric : spec.outputs)
        for (Scheme scheme : spec.schemes) emitter.emit(metric, scheme);
    }
  return rows;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::uint64_t seed) {
  return run_sweep(spec, nlohmann::json::object(), seed);
}

// ---- Single-configuration reports ------------------------------------------

namespace detail {

inline std::vector<SweepRow> single_config_rows(const SystemConfig& cfg, SweepMetric metric,
                                                std::initializer_list<Scheme> schemes,
                                                long trials, std::uint64_t seed) {
  cfg.validate();
  const std::vector<Scenario> scenarios = {Scenario::kNonCooperative, Scenario::kCooperative};
  const std::vector<Filter> filters = {Filter::kMf, Filter::kZf};
  const std::string no_label;
  std::vector<SweepRow> rows;
  RowEmitter emitter{cfg,  std::numeric_limits<double>::quiet_NaN(),
                     no_label, seed, trials, 0.1, scenarios, filters, rows};
  for (Scheme s : schemes) emitter.emit(metric, s);
  return rows;
}

}  // namespace detail

// Monte Carlo sum rates of both training schemes over every
// (scenario, filter, link) slice of one configuration.
inline std::vector<SweepRow> simulate_rows(const SystemConfig& cfg, long trials,
                                           std::uint64_t seed) {
  return detail::single_config_rows(cfg, SweepMetric::kSumRateMc,
                                    {Scheme::kNspt, Scheme::kSpt}, trials, seed);
}

// Closed-form counterparts of simulate_rows.
inline std::vector<SweepRow> analytic_rows(const SystemConfig& cfg, std::uint64_t seed) {
  return detail::single_config_rows(cfg, SweepMetric::kSumRateAnalytic,
                                    {Scheme::kNspt, Scheme::kSpt}, 0, seed);
}

// Array-aggregate self-interference estimation error of both schemes.
inline std::vector<SweepRow> nmse_rows(const SystemConfig& cfg, std::uint64_t seed) {
  return detail::single_config_rows(cfg, SweepMetric::kNmse, {Scheme::kNspt, Scheme::kSpt}, 0,
                                    seed);
}

// Slot-discounted margins over the half-duplex baseline; a nonnegative value
// means that link (or the joint row) clears the baseline.
inline std::vector<SweepRow> region_rows(const SystemConfig& cfg, std::uint64_t seed) {
  return detail::single_config_rows(cfg, SweepMetric::kRegionVerdict,
                                    {Scheme::kNspt, Scheme::kSpt}, 0, seed);
}

// Throughput ratio against the even-split baseline; trials = 0 compares the
// closed forms instead of simulating.
inline std::vector<SweepRow> compare_rows(const SystemConfig& cfg, long trials,
                                          std::uint64_t seed) {
  return detail::single_config_rows(cfg, SweepMetric::kFdHdRatio,
                                    {Scheme::kNspt, Scheme::kSpt}, trials, seed);
}

}  // namespace fdx
