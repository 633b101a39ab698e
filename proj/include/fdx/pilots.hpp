// SPDX-License-Identifier: Apache-2.0
//
// Pilot matrices: unitary DFT blocks for the staggered scheme, and
// cyclically shifted Zadoff-Chu sequences for the overlapped scheme, whose
// cross-correlation against every DFT column is exactly flat (1/tau).

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "fdx/config.hpp"
#include "fdx/errors.hpp"

namespace fdx {

using Eigen::MatrixXcd;

// First `cols` columns of the unitary tau-point DFT.
inline MatrixXcd dft_pilots(int tau, int cols) {
  if (cols > tau || cols < 0 || tau < 0)
    throw ValidationError("pilot length must be >= pilot count");
  MatrixXcd phi(tau, cols);
  const double scale = tau > 0 ? 1.0 / std::sqrt(static_cast<double>(tau)) : 0.0;
  for (int k = 0; k < cols; ++k)
    for (int t = 0; t < tau; ++t) {
      const double ang = -2.0 * std::numbers::pi * t * k / tau;
      phi(t, k) = std::polar(scale, ang);
    }
  return phi;
}

// Root-1 Zadoff-Chu sequence of length tau, cyclic shift s, unit-norm.
inline Eigen::VectorXcd zc_sequence(int tau, int shift) {
  Eigen::VectorXcd v(tau);
  const double scale = 1.0 / std::sqrt(static_cast<double>(tau));
  for (int t = 0; t < tau; ++t) {
    const int n = (t + shift) % tau;
    const double ang = (tau % 2 == 1)
                           ? -std::numbers::pi * n * (n + 1) / tau
                           : -std::numbers::pi * n * n / tau;
    v(t) = std::polar(scale, ang);
  }
  return v;
}

// `cols` distinct cyclic shifts; orthonormal because the root-1 sequence has
// an ideal cyclic autocorrelation.
inline MatrixXcd zc_shift_pilots(int tau, int cols) {
  if (cols > tau || cols < 0 || tau < 0)
    throw ValidationError("pilot length must be >= pilot count");
  MatrixXcd phi(tau, cols);
  for (int u = 0; u < cols; ++u) phi.col(u) = zc_sequence(tau, u);
  return phi;
}

struct PilotSet {
  Scheme scheme = Scheme::kNspt;
  MatrixXcd phi_ud;  // tau_ud x k_dl
  MatrixXcd phi_uu;  // tau_uu x k_ul (staggered) or tau_max x k_ul (overlapped)
  MatrixXcd phi_si;  // tau_si x m_tx (staggered) or tau_max x m_tx (overlapped)
  int tau_max = 0;
};

inline PilotSet make_pilots(const SystemConfig& config, Scheme scheme) {
  PilotSet ps;
  ps.scheme = scheme;
  ps.tau_max = config.tau_max();
  if (scheme == Scheme::kPerfect) return ps;  // nothing to train
  ps.phi_ud = dft_pilots(config.tau_ud, config.k_dl);
  if (scheme == Scheme::kNspt) {
    ps.phi_uu = dft_pilots(config.tau_uu, config.k_ul);
    ps.phi_si = dft_pilots(config.tau_si, config.m_tx);
  } else {
    ps.phi_uu = zc_shift_pilots(ps.tau_max, config.k_ul);
    ps.phi_si = dft_pilots(ps.tau_max, config.m_tx);
  }
  return ps;
}

}  // namespace fdx
