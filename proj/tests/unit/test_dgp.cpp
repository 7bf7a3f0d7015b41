#include <doctest.h>

#include <cmath>

#include "lsmd/dgp.hpp"
#include "lsmd/errors.hpp"
#include "lsmd/rng.hpp"

using namespace lsmd;

TEST_CASE("philox4x32-10 known answers") {
  using rng::Block;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter rng is addressable and stream separated") {
  const rng::CounterRng a(42, rng::Stream::epsilon);
  const rng::CounterRng b(42, rng::Stream::eta);
  CHECK(a.normal(3, 5) == a.normal(3, 5));
  CHECK(a.normal(3, 5) != b.normal(3, 5));
  CHECK(a.normal(3, 5) != a.normal(5, 3));
  CHECK(rng::CounterRng(43, rng::Stream::epsilon).normal(3, 5) != a.normal(3, 5));

  double sum = 0;
  double sq = 0;
  double umin = 1;
  double umax = 0;
  const int m = 200000;
  for (int k = 0; k < m; ++k) {
    const double z = a.normal(0, static_cast<std::uint32_t>(k));
    sum += z;
    sq += z * z;
    const double u = a.uniform(1, static_cast<std::uint32_t>(k));
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(std::abs(sum / m) < 4.0 / std::sqrt(m));
  CHECK(std::abs(sq / m - 1.0) < 4.0 * std::sqrt(2.0 / m));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
}

TEST_CASE("sequential rng is deterministic") {
  rng::SequentialRng s1(9, rng::Stream::inner_start);
  rng::SequentialRng s2(9, rng::Stream::inner_start);
  for (int k = 0; k < 10; ++k) CHECK(s1.normal() == s2.normal());
}

TEST_CASE("table1_config carries the simulation design") {
  const DgpConfig c = table1_config(0.5, 50, 50, 7);
  CHECK(c.alpha0 == 0.5);
  CHECK(c.n == 50);
  CHECK(c.t == 50);
  CHECK(c.sigma_eps2 == 1.0);
  CHECK(c.sigma_eta2 == 0.4);
  CHECK(c.sigma_lambda2 == 0.4);
  CHECK(c.sigma_f2 == 0.4);
  CHECK(c.burn_in == 100);
  const DgpConfig d = table1_config(0.8, 100, 100, 7);
  CHECK(d.n == 100);
  CHECK(d.sigma_eta2 == 0.4);
  CHECK(table1_config(0.8, 100, 100, 7) == d);
}

TEST_CASE("config validation") {
  DgpConfig c = table1_config(0.5, 10, 10, 1);
  c.alpha0 = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.alpha0 = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = table1_config(0.5, 1, 10, 1);
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = table1_config(0.5, 10, 10, 1);
  c.sigma_eta2 = -0.1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = table1_config(0.5, 10, 10, 1);
  c.burn_in = -1;
  CHECK_THROWS_AS(generate_panel(c), ValidationError);
}

TEST_CASE("generate_panel is a pure function of its configuration") {
  const DgpConfig c = table1_config(0.5, 8, 12, 99);
  const PanelData a = generate_panel(c);
  const PanelData b = generate_panel(c);
  CHECK(a.y == b.y);
  CHECK(a.pre_sample == b.pre_sample);
  CHECK(a.truth->lambda0 == b.truth->lambda0);
  CHECK(a.truth->f0 == b.truth->f0);

  DgpConfig other = c;
  other.seed = 100;
  CHECK(generate_panel(other).y != a.y);
}

TEST_CASE("extending T leaves earlier periods unchanged") {
  const PanelData short_panel = generate_panel(table1_config(0.5, 6, 10, 5));
  const PanelData long_panel = generate_panel(table1_config(0.5, 6, 15, 5));
  CHECK(long_panel.y.leftCols(10) == short_panel.y);
  CHECK(long_panel.pre_sample == short_panel.pre_sample);
}

TEST_CASE("shapes and pre-sample retention") {
  DgpConfig c = table1_config(0.5, 4, 6, 3);
  c.max_lag = 3;
  const PanelData p = generate_panel(c);
  CHECK(p.n() == 4);
  CHECK(p.t() == 6);
  CHECK(p.pre_periods() == 3);
  const SimulationTruth& tr = *p.truth;
  CHECK(tr.lambda0.size() == 4);
  CHECK(tr.f0.size() == 6);
  CHECK(tr.f0_pre.size() == 3);
  CHECK(tr.factor_stock.size() == 9);
  CHECK(tr.latent_pre_sample.cols() == 3);
  const Matrix full = p.full_series();
  CHECK(full.cols() == 9);
  CHECK(full.rightCols(6) == p.y);
  CHECK(full.leftCols(3) == p.pre_sample);
}

TEST_CASE("factor stock follows its recursion") {
  const PanelData p = generate_panel(table1_config(0.7, 3, 8, 13));
  const SimulationTruth& tr = *p.truth;
  Vector f(tr.f0_pre.size() + tr.f0.size());
  f << tr.f0_pre, tr.f0;
  for (Eigen::Index s = 1; s < f.size(); ++s) {
    CHECK(tr.factor_stock(s) == doctest::Approx(f(s) + 0.7 * tr.factor_stock(s - 1)).epsilon(1e-12));
  }
}

TEST_CASE("all shocks off gives a zero panel") {
  DgpConfig c = table1_config(0.5, 5, 5, 1);
  c.sigma_eps2 = 0;
  c.sigma_eta2 = 0;
  c.sigma_f2 = 0;
  const PanelData p = generate_panel(c);
  CHECK(p.y.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.pre_sample.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("no measurement error gives the latent panel") {
  DgpConfig c = table1_config(0.5, 5, 7, 2);
  c.sigma_eta2 = 0;
  const PanelData p = generate_panel(c);
  CHECK(p.y == p.truth->y_latent);
  CHECK(p.pre_sample == p.truth->latent_pre_sample);
}

TEST_CASE("latent recursion holds exactly without idiosyncratic shocks") {
  DgpConfig c = table1_config(0.6, 4, 9, 8);
  c.sigma_eps2 = 0;
  const PanelData p = generate_panel(c);
  const SimulationTruth& tr = *p.truth;
  const Eigen::Index pre = p.pre_periods();
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index t = 0; t < 9; ++t) {
      CHECK(tr.y_latent(i, t) == doctest::Approx(tr.lambda0(i) * tr.factor_stock(pre + t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("demeaned factors have zero sample mean") {
  DgpConfig c = table1_config(0.5, 3, 30, 4);
  c.demean_factors = true;
  c.factor_mean = 2.0;
  const PanelData p = generate_panel(c);
  Vector f(p.truth->f0_pre.size() + p.truth->f0.size());
  f << p.truth->f0_pre, p.truth->f0;
  CHECK(std::abs(f.mean()) < 0.5);
}
