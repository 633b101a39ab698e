// SPDX-License-Identifier: Apache-2.0
//
// Unit conversions, deterministic reductions, and locale-stable formatting.

#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <locale>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace fdx {

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }

inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Pairwise (cascade) summation. The fixed recursion tree makes the result
// independent of chunking, so serial and parallel reductions agree exactly.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

// Standard error of the sample mean (unbiased variance estimate).
inline double std_error(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - m;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

// Up to 12 significant digits, '.' decimal separator regardless of locale.
inline std::string format_number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << x;
  return os.str();
}

}  // namespace fdx
