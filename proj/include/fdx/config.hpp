// SPDX-License-Identifier: Apache-2.0
//
// System configuration: JSON parsing, validation, defaults, and the derived
// power/overhead quantities every other module consumes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fdx/errors.hpp"
#include "fdx/numeric.hpp"

namespace fdx {

enum class Scenario { kNonCooperative, kCooperative };
enum class Scheme { kNspt, kSpt, kPerfect };
enum class Filter { kMf, kZf };
enum class Link { kDownlink, kUplink };
enum class Duplex { kFull, kHalf };

inline const char* to_string(Scenario s) {
  return s == Scenario::kNonCooperative ? "non-cooperative" : "cooperative";
}
inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kNspt: return "nspt";
    case Scheme::kSpt: return "spt";
    default: return "perfect";
  }
}
inline const char* to_string(Filter f) { return f == Filter::kMf ? "mf" : "zf"; }
inline const char* to_string(Link l) { return l == Link::kDownlink ? "dl" : "ul"; }
inline const char* to_string(Duplex d) { return d == Duplex::kFull ? "fd" : "hd"; }

inline Scenario parse_scenario(const std::string& s) {
  if (s == "non-cooperative") return Scenario::kNonCooperative;
  if (s == "cooperative") return Scenario::kCooperative;
  throw ValidationError("scenario must be \"non-cooperative\" or \"cooperative\", got \"" + s + "\"");
}
inline Scheme parse_scheme(const std::string& s) {
  if (s == "nspt") return Scheme::kNspt;
  if (s == "spt") return Scheme::kSpt;
  if (s == "perfect") return Scheme::kPerfect;
  throw ValidationError("scheme must be one of nspt|spt|perfect, got \"" + s + "\"");
}
inline Filter parse_filter(const std::string& s) {
  if (s == "mf") return Filter::kMf;
  if (s == "zf") return Filter::kZf;
  throw ValidationError("filter must be mf or zf, got \"" + s + "\"");
}
inline Link parse_link(const std::string& s) {
  if (s == "dl") return Link::kDownlink;
  if (s == "ul") return Link::kUplink;
  throw ValidationError("link must be dl or ul, got \"" + s + "\"");
}

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s, free-space model value

struct SystemConfig {
  // Mandatory.
  int n_cells = 0;
  int m_tx = 0;
  int m_rx = 0;
  int k_dl = 0;
  int k_ul = 0;
  double p_ref_dbm = 0.0;
  double cell_radius_m = 0.0;

  // Optional with defaults.
  double noise_floor_dbm = -90.0;
  double alpha_db = -100.0;
  double beta_db = -100.0;
  double c_dl_bpshz = 20.0;
  double c_ul_bpshz = 20.0;
  int tau_si = 0;  // defaults to m_tx
  int tau_uu = 0;  // defaults to k_ul
  int tau_ud = 0;  // defaults to k_dl
  int total_symbols = 800;
  double carrier_hz = 2.4e9;
  double pathloss_exp = 3.8;
  double shadow_db = 8.0;
  double boundary_fraction = 0.05;
  double bs_antenna_spacing_m = 0.0;  // defaults to lambda/2
  double bs_txrx_gap_m = 0.5;
  Scenario scenario = Scenario::kNonCooperative;
  std::optional<double> symbol_duration_s;  // no default; coherence times stay in symbols

  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  double p_ref_mw() const { return dbm_to_mw(p_ref_dbm); }
  // Per-node transmit power with the antenna-count scaling P_d = P_u = P_r/sqrt(M).
  double p_node_mw() const { return p_ref_mw() / std::sqrt(static_cast<double>(m_tx)); }
  // Effective DL data power after fronthaul forwarding, P_s = P_d (1 - 2^{-C_d}).
  double p_coop_dl_mw() const { return p_node_mw() * (1.0 - std::exp2(-c_dl_bpshz)); }
  double noise_mw() const { return dbm_to_mw(noise_floor_dbm); }
  double alpha_lin() const { return db_to_lin(alpha_db); }
  double beta_lin() const { return db_to_lin(beta_db); }

  int tau_max() const { return std::max(tau_si, tau_uu); }
  int tau_fd(Scheme scheme) const {
    switch (scheme) {
      case Scheme::kNspt: return tau_si + tau_uu + tau_ud;
      case Scheme::kSpt: return tau_max() + tau_ud;
      default: return 0;  // perfect CSI trains nothing
    }
  }
  int tau_hd() const { return tau_uu + tau_ud; }

  void validate() const {
    if (n_cells < 1) throw ValidationError("n_cells must be >= 1");
    if (m_tx < 1) throw ValidationError("m_tx must be >= 1");
    if (m_rx < 1) throw ValidationError("m_rx must be >= 1");
    if (k_dl < 0) throw ValidationError("k_dl must be >= 0");
    if (k_ul < 0) throw ValidationError("k_ul must be >= 0");
    if (!(cell_radius_m > 0.0)) throw ValidationError("cell_radius_m must be > 0");
    if (tau_si < m_tx) throw ValidationError("tau_si must be >= m_tx");
    if (tau_uu < k_ul) throw ValidationError("tau_uu must be >= k_ul");
    if (tau_ud < k_dl) throw ValidationError("tau_ud must be >= k_dl");
    if (total_symbols <= tau_si + tau_uu + tau_ud)
      throw ValidationError("total_symbols must exceed the pilot overhead of every scheme");
    if (!(boundary_fraction > 0.0) || boundary_fraction > 1.0)
      throw ValidationError("boundary_fraction must be in (0,1]");
    if (!(carrier_hz > 0.0)) throw ValidationError("carrier_hz must be > 0");
    if (!(pathloss_exp > 0.0)) throw ValidationError("pathloss_exp must be > 0");
    if (shadow_db < 0.0) throw ValidationError("shadow_db must be >= 0");
    if (!(bs_antenna_spacing_m > 0.0)) throw ValidationError("bs_antenna_spacing_m must be > 0");
    if (!(bs_txrx_gap_m > 0.0)) throw ValidationError("bs_txrx_gap_m must be > 0");
    if (symbol_duration_s && !(*symbol_duration_s > 0.0))
      throw ValidationError("symbol_duration_s must be > 0");
  }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(key + " must be a number");
  return v.get<double>();
}

inline int require_count(const nlohmann::json& j, const std::string& key) {
  const double x = require_number(j, key);
  if (x != std::floor(x) || std::abs(x) > 1e9)
    throw ValidationError(key + " must be an integer");
  return static_cast<int>(x);
}

}  // namespace detail

inline SystemConfig load_config_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("config document must be an object");
  static const std::set<std::string> known = {
      "n_cells", "m_tx", "m_rx", "k_dl", "k_ul", "p_ref_dbm", "cell_radius_m",
      "noise_floor_dbm", "alpha_db", "beta_db", "c_dl_bpshz", "c_ul_bpshz",
      "tau_si", "tau_uu", "tau_ud", "total_symbols", "symbol_duration_s",
      "carrier_hz", "pathloss_exp", "shadow_db", "boundary_fraction",
      "bs_antenna_spacing_m", "bs_txrx_gap_m", "scenario"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("unknown field: " + it.key());
  }
  for (const char* field : {"n_cells", "m_tx", "m_rx", "k_dl", "k_ul", "p_ref_dbm", "cell_radius_m"}) {
    if (!doc.contains(field)) throw ValidationError(std::string(field) + " missing");
  }

  SystemConfig c;
  c.n_cells = detail::require_count(doc, "n_cells");
  c.m_tx = detail::require_count(doc, "m_tx");
  c.m_rx = detail::require_count(doc, "m_rx");
  c.k_dl = detail::require_count(doc, "k_dl");
  c.k_ul = detail::require_count(doc, "k_ul");
  c.p_ref_dbm = detail::require_number(doc, "p_ref_dbm");
  c.cell_radius_m = detail::require_number(doc, "cell_radius_m");

  if (doc.contains("noise_floor_dbm")) c.noise_floor_dbm = detail::require_number(doc, "noise_floor_dbm");
  if (doc.contains("alpha_db")) c.alpha_db = detail::require_number(doc, "alpha_db");
  if (doc.contains("beta_db")) c.beta_db = detail::require_number(doc, "beta_db");
  if (doc.contains("c_dl_bpshz")) c.c_dl_bpshz = detail::require_number(doc, "c_dl_bpshz");
  if (doc.contains("c_ul_bpshz")) c.c_ul_bpshz = detail::require_number(doc, "c_ul_bpshz");
  c.tau_si = doc.contains("tau_si") ? detail::require_count(doc, "tau_si") : c.m_tx;
  c.tau_uu = doc.contains("tau_uu") ? detail::require_count(doc, "tau_uu") : c.k_ul;
  c.tau_ud = doc.contains("tau_ud") ? detail::require_count(doc, "tau_ud") : c.k_dl;
  if (doc.contains("total_symbols")) c.total_symbols = detail::require_count(doc, "total_symbols");
  if (doc.contains("carrier_hz")) c.carrier_hz = detail::require_number(doc, "carrier_hz");
  if (doc.contains("pathloss_exp")) c.pathloss_exp = detail::require_number(doc, "pathloss_exp");
  if (doc.contains("shadow_db")) c.shadow_db = detail::require_number(doc, "shadow_db");
  if (doc.contains("boundary_fraction")) c.boundary_fraction = detail::require_number(doc, "boundary_fraction");
  if (doc.contains("bs_antenna_spacing_m"))
    c.bs_antenna_spacing_m = detail::require_number(doc, "bs_antenna_spacing_m");
  else
    c.bs_antenna_spacing_m = c.carrier_hz > 0.0 ? c.wavelength_m() / 2.0 : 0.0;
  if (doc.contains("bs_txrx_gap_m")) c.bs_txrx_gap_m = detail::require_number(doc, "bs_txrx_gap_m");
  if (doc.contains("scenario")) {
    const auto& v = doc.at("scenario");
    if (!v.is_string()) throw ValidationError("scenario must be a string");
    c.scenario = parse_scenario(v.get<std::string>());
  }
  if (doc.contains("symbol_duration_s")) c.symbol_duration_s = detail::require_number(doc, "symbol_duration_s");

  c.validate();
  return c;
}

inline SystemConfig load_config(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("config document is not valid JSON");
  return load_config_json(doc);
}

inline SystemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading config file: " + path);
  return load_config(buf.str());
}

}  // namespace fdx
