// SPDX-License-Identifier: Apache-2.0
//
// Beamforming filters and the hardware/fronthaul impairment draws: MF and ZF
// precoders/detectors with their normalization contracts, fronthaul
// quantization noise powers, and per-draw Tx-noise / Rx-distortion vectors.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/estimation.hpp"
#include "fdx/rng.hpp"

namespace fdx {

using Eigen::VectorXcd;

enum class Normalization { kMatrix, kVector };

// Transmit filter. Non-cooperative: one m_tx x k_dl block per cell, each
// built from that cell's own estimate. Cooperative: a single stacked
// (m_tx*n) x (k_dl*n) matrix built from the network-wide estimate.
struct Precoder {
  Filter kind = Filter::kMf;
  Scenario scenario = Scenario::kNonCooperative;
  Normalization normalization = Normalization::kMatrix;
  std::vector<Eigen::MatrixXcd> f;
};

// Receive filter, same block layout with k_ul x m_rx (or stacked) matrices.
struct Detector {
  Filter kind = Filter::kMf;
  Scenario scenario = Scenario::kNonCooperative;
  std::vector<Eigen::MatrixXcd> w;
};

namespace detail {

// Guard shared by every Gram-matrix solve. `gram` is Hermitian PSD by
// construction; reject rank deficiency and near-singularity in one place.
inline void check_gram(const Eigen::MatrixXcd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi > 1e12 * lo)
    throw SingularityError("Gram matrix is singular or ill-conditioned");
}

// ZF beams: columns of ghat_conj * (ghat^T ghat_conj)^{-1}, i.e. the matrix
// F with ghat^T F = I, via a Gram solve rather than an explicit inverse.
inline Eigen::MatrixXcd zf_beams(const Eigen::MatrixXcd& ghat) {
  if (ghat.rows() < ghat.cols())
    throw SingularityError("ZF needs at least as many antennas as streams");
  const Eigen::MatrixXcd gram = ghat.transpose() * ghat.conjugate();
  check_gram(gram);
  return gram.ldlt().solve(ghat.transpose()).adjoint();
}

inline Eigen::MatrixXcd precoder_block(const Eigen::MatrixXcd& ghat, Filter kind) {
  if (kind == Filter::kMf) {
    const double norm = ghat.norm();
    // An all-zero estimate has nothing to match; transmit nothing rather
    // than fail, so degenerate realizations stay representable downstream.
    if (norm == 0.0) return Eigen::MatrixXcd::Zero(ghat.rows(), ghat.cols());
    return ghat.conjugate() / norm;
  }
  Eigen::MatrixXcd f = zf_beams(ghat);
  const double scale = std::sqrt(static_cast<double>(f.cols()));
  for (Eigen::Index k = 0; k < f.cols(); ++k) f.col(k) /= scale * f.col(k).norm();
  return f;
}

inline Eigen::MatrixXcd detector_block(const Eigen::MatrixXcd& ghat, Filter kind) {
  if (kind == Filter::kMf) return ghat.adjoint();
  if (ghat.rows() < ghat.cols())
    throw SingularityError("ZF needs at least as many antennas as streams");
  const Eigen::MatrixXcd gram = ghat.adjoint() * ghat;
  check_gram(gram);
  return gram.ldlt().solve(ghat.adjoint());
}

// Network-wide channel with BS blocks stacked down the rows and each cell's
// users stacked across the columns.
inline Eigen::MatrixXcd stack_blocks(const std::vector<std::vector<Eigen::MatrixXcd>>& blocks) {
  const int n = static_cast<int>(blocks.size());
  const Eigen::Index rows = blocks[0][0].rows();
  const Eigen::Index cols = blocks[0][0].cols();
  Eigen::MatrixXcd full(rows * n, cols * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full.block(i * rows, j * cols, rows, cols) = blocks[i][j];
  return full;
}

}  // namespace detail

inline Precoder build_precoder(const ChannelEstimate& est, Filter kind, Scenario scenario) {
  Precoder p;
  p.kind = kind;
  p.scenario = scenario;
  p.normalization = kind == Filter::kMf ? Normalization::kMatrix : Normalization::kVector;
  if (scenario == Scenario::kCooperative) {
    p.f.push_back(detail::precoder_block(detail::stack_blocks(est.dl), kind));
  } else {
    const int n = static_cast<int>(est.dl.size());
    for (int i = 0; i < n; ++i) p.f.push_back(detail::precoder_block(est.dl[i][i], kind));
  }
  return p;
}

inline Detector build_detector(const ChannelEstimate& est, Filter kind, Scenario scenario) {
  Detector d;
  d.kind = kind;
  d.scenario = scenario;
  if (scenario == Scenario::kCooperative) {
    d.w.push_back(detail::detector_block(detail::stack_blocks(est.ul), kind));
  } else {
    const int n = static_cast<int>(est.ul.size());
    for (int i = 0; i < n; ++i) d.w.push_back(detail::detector_block(est.ul[i][i], kind));
  }
  return d;
}

// Fronthaul quantization over a capacity-C link. The DL fronthaul carries
// precoded symbols at effective power P_s = P_d (1 - 2^-C); the UL fronthaul
// forwards the raw antenna signal, so only its power enters.
struct DlQuantization {
  double p_s = 0.0;
  double sigma2 = 0.0;
};

inline DlQuantization dl_quantization(double capacity_bpshz, double p_d, double e_x2) {
  if (!(capacity_bpshz > 0.0)) throw std::domain_error("fronthaul capacity must be > 0");
  if (e_x2 < 0.0 || p_d < 0.0) throw std::domain_error("signal power must be >= 0");
  DlQuantization q;
  q.p_s = p_d * (1.0 - std::exp2(-capacity_bpshz));
  q.sigma2 = q.p_s * e_x2 / (std::exp2(capacity_bpshz) - 1.0);
  return q;
}

inline double ul_quantization(double capacity_bpshz, double e_y2) {
  if (!(capacity_bpshz > 0.0)) throw std::domain_error("fronthaul capacity must be > 0");
  if (e_y2 < 0.0) throw std::domain_error("signal power must be >= 0");
  return e_y2 / (std::exp2(capacity_bpshz) - 1.0);
}

// One realization of the hardware impairments, conditioned on the realized
// signals: psi_k ~ CN(0, alpha |s_k|^2) on each Tx stream and
// delta_l ~ CN(0, beta |y_l|^2) at each Rx antenna. The fronthaul
// quantization vectors are filled by the rate engine once their powers are
// known; they live here because they enter the received signal the same way.
struct ImpairmentDraws {
  VectorXcd psi;
  VectorXcd delta;
  VectorXcd q_dl;
  VectorXcd q_ul;
};

inline ImpairmentDraws draw_impairments(const VectorXcd& tx_symbols,
                                        const VectorXcd& undistorted_rx, double alpha,
                                        double beta, std::uint64_t seed) {
  if (alpha < 0.0 || beta < 0.0)
    throw std::domain_error("impairment levels must be >= 0");
  ImpairmentDraws out;
  out.psi = VectorXcd::Zero(tx_symbols.size());
  out.delta = VectorXcd::Zero(undistorted_rx.size());
  if (alpha > 0.0) {
    SubstreamRng rng(seed, {static_cast<std::uint64_t>(Stream::kTxNoise)});
    for (Eigen::Index k = 0; k < tx_symbols.size(); ++k)
      out.psi[k] = std::sqrt(alpha) * std::abs(tx_symbols[k]) * rng.cnormal();
  }
  if (beta > 0.0) {
    SubstreamRng rng(seed, {static_cast<std::uint64_t>(Stream::kRxDistortion)});
    for (Eigen::Index l = 0; l < undistorted_rx.size(); ++l)
      out.delta[l] = std::sqrt(beta) * std::abs(undistorted_rx[l]) * rng.cnormal();
  }
  return out;
}

}  // namespace fdx
