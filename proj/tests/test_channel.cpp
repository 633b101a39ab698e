// SPDX-License-Identifier: Apache-2.0
//
// Profile construction, Rayleigh statistics, composition, and the dump format.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "fdx/channel.hpp"

using Catch::Approx;

namespace {

fdx::SystemConfig small_config() {
  return fdx::load_config(R"({
    "n_cells": 2, "m_tx": 4, "m_rx": 4, "k_dl": 2, "k_ul": 2,
    "p_ref_dbm": 20, "cell_radius_m": 500
  })");
}

}  // namespace

TEST_CASE("profile is deterministic and respects dimensions") {
  const auto cfg = small_config();
  const auto geo = fdx::place_users(cfg, 5);
  const auto a = fdx::build_profile(cfg, geo, 11);
  const auto b = fdx::build_profile(cfg, geo, 11);
  CHECK(a.d_dl[1][0][1] == b.d_dl[1][0][1]);
  CHECK(a.d_bs[0][1] == b.d_bs[0][1]);
  CHECK(a.d_bs[0][1] == a.d_bs[1][0]);
  CHECK(a.d_bs[0][0] == 0.0);
  CHECK(a.d_ue[0][1].rows() == 2);
  CHECK(a.d_ue[0][1].cols() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        CHECK(a.d_dl[i][j][k] > 0.0);
        CHECK(a.d_ul[i][j][k] > 0.0);
      }
  const auto c = fdx::build_profile(cfg, geo, 12);
  CHECK(a.d_dl[0][0][0] != c.d_dl[0][0][0]);
}

TEST_CASE("self-interference block ignores cell radius and is offset-symmetric") {
  auto cfg = small_config();
  const auto geo1 = fdx::place_users(cfg, 5);
  const auto p1 = fdx::build_profile(cfg, geo1, 11);
  cfg.cell_radius_m = 2000.0;
  const auto geo2 = fdx::place_users(cfg, 5);
  const auto p2 = fdx::build_profile(cfg, geo2, 11);
  REQUIRE(p1.si_offset.size() == p2.si_offset.size());
  for (std::size_t i = 0; i < p1.si_offset.size(); ++i)
    CHECK(p1.si_offset[i] == p2.si_offset[i]);
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m) CHECK(p1.si_gain(l, m) == p1.si_gain(m, l));
  // Straight-down pair at the array gap distance.
  const double expect = std::pow(cfg.wavelength_m() / (4.0 * std::numbers::pi * 0.5), 2);
  CHECK(p1.si_gain(0, 0) == Approx(expect));
  CHECK(p1.si_row_sum(0) == Approx(p1.si_gain(0, 0) + p1.si_gain(0, 1) +
                                   p1.si_gain(0, 2) + p1.si_gain(0, 3)));
  double total = 0.0;
  for (int l = 0; l < 4; ++l) total += p1.si_row_sum(l);
  CHECK(p1.si_total() == Approx(total));
}

TEST_CASE("shadowing statistics match the configured spread") {
  auto cfg = small_config();
  cfg.n_cells = 1;
  cfg.k_dl = 1;
  cfg.k_ul = 0;
  cfg.tau_uu = 0;
  const auto geo = fdx::place_users(cfg, 1);
  const double d = fdx::distance(geo.bs_positions[0], geo.dl_users[0][0]);
  const double base = std::pow(d, -cfg.pathloss_exp);
  const int n = 100000;
  std::vector<double> log_z(n);
  for (int t = 0; t < n; ++t) {
    const auto p = fdx::build_profile(cfg, geo, static_cast<std::uint64_t>(t));
    log_z[t] = 10.0 * std::log10(p.d_dl[0][0][0] / base);
  }
  const double m = fdx::mean(log_z);
  double var = 0.0;
  for (double x : log_z) var += (x - m) * (x - m);
  var /= (n - 1);
  const double sd = std::sqrt(var);
  // SE of the sample std of a normal: sigma/sqrt(2n).
  const double se = 8.0 / std::sqrt(2.0 * n);
  CHECK(m == Approx(0.0).margin(3.0 * 8.0 / std::sqrt(static_cast<double>(n))));
  CHECK(sd == Approx(8.0).margin(3.0 * se));
}

TEST_CASE("fading entries are unit-variance circular and independent") {
  auto cfg = small_config();
  cfg.n_cells = 1;
  const auto geo = fdx::place_users(cfg, 3);
  const auto p = fdx::build_profile(cfg, geo, 3);
  const int n = 100000;
  std::complex<double> mean_acc{0, 0};
  double var_acc = 0.0;
  std::complex<double> cross_acc{0, 0};
  for (int t = 0; t < n; ++t) {
    const auto c = fdx::sample_channels(p, static_cast<std::uint64_t>(t));
    const auto z = c.h_dl[0][0](0, 0);
    const auto w = c.h_bs[0][0](1, 2);
    mean_acc += z;
    var_acc += std::norm(z);
    cross_acc += z * std::conj(w);
  }
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean_acc) / n == Approx(0.0).margin(tol));
  CHECK(var_acc / n == Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
  CHECK(std::abs(cross_acc) / n == Approx(0.0).margin(tol));
}

TEST_CASE("composition scales columns by the exact gain root") {
  const auto cfg = small_config();
  const auto geo = fdx::place_users(cfg, 5);
  const auto p = fdx::build_profile(cfg, geo, 11);
  const auto c = fdx::sample_channels(p, 17);
  const auto g = fdx::g_dl(p, c, 0, 1);
  for (int k = 0; k < p.k_dl; ++k)
    for (int m = 0; m < p.m_tx; ++m)
      CHECK(g(m, k) == c.h_dl[0][1](m, k) * std::sqrt(p.d_dl[0][1][k]));
  const auto gb = fdx::g_bs(p, c, 0, 0);
  CHECK(gb(1, 3) == c.h_bs[0][0](1, 3) * std::sqrt(p.si_gain(1, 3)));
  const auto gx = fdx::g_bs(p, c, 0, 1);
  CHECK(gx(2, 2) == c.h_bs[0][1](2, 2) * std::sqrt(p.d_bs[0][1]));
  const auto gu = fdx::g_ue(p, c, 1, 0);
  CHECK(gu(0, 1) == c.h_ue[1][0](0, 1) * std::sqrt(p.d_ue[1][0](0, 1)));
  // E[|g|^2] equals the profile gain.
  const int n = 20000;
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto ct = fdx::sample_channels(p, 1000000 + static_cast<std::uint64_t>(t));
    acc += std::norm(fdx::g_dl(p, ct, 0, 0)(0, 0));
  }
  CHECK(acc / n == Approx(p.d_dl[0][0][0]).epsilon(3.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("dump round-trips at float precision and rejects bad files") {
  const auto cfg = small_config();
  const auto geo = fdx::place_users(cfg, 5);
  const auto p = fdx::build_profile(cfg, geo, 11);
  const auto c = fdx::sample_channels(p, 23);
  const std::string path = "fdx_test_dump.bin";
  fdx::dump_realization(c, p, path);
  const auto back = fdx::load_realization(path);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) {
      REQUIRE(back.h_bs[i][j].rows() == c.h_bs[i][j].rows());
      for (int r = 0; r < c.h_bs[i][j].rows(); ++r)
        for (int col = 0; col < c.h_bs[i][j].cols(); ++col)
          CHECK(std::abs(back.h_bs[i][j](r, col) - c.h_bs[i][j](r, col)) < 1e-6);
    }
  {
    std::ofstream trunc(path, std::ios::binary);
    trunc << "FDXCHAN1";
  }
  CHECK_THROWS_AS(fdx::load_realization(path), fdx::IoError);
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOTMAGIC and some garbage";
  }
  CHECK_THROWS_AS(fdx::load_realization(path), fdx::IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(fdx::load_realization("missing_dump.bin"), fdx::IoError);
  CHECK_THROWS_AS(fdx::dump_realization(c, p, "no_dir/x.bin"), fdx::IoError);
}
