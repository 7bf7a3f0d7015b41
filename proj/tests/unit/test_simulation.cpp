#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lsmd/asymptotics.hpp"
#include "lsmd/dgp.hpp"
#include "lsmd/estimator.hpp"
#include "lsmd/linalg.hpp"
#include "lsmd/montecarlo.hpp"
#include "lsmd/rng.hpp"
#include "oracles.hpp"

using namespace lsmd;

namespace {

double sample_variance(const Matrix& m) {
  const double mean = m.mean();
  return (m.array() - mean).square().sum() / static_cast<double>(m.size() - 1);
}

// Mean of x over all cells and its standard error from per-unit averages.
struct UnitMean {
  double mean = 0;
  double se = 0;
};

UnitMean unit_clustered_mean(const Matrix& x) {
  const Vector rows = x.rowwise().mean();
  const double n = static_cast<double>(rows.size());
  const double mean = rows.mean();
  const double var = (rows.array() - mean).square().sum() / (n - 1);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

TEST_CASE("stationary variance of the observed panel") {
  DgpConfig c = table1_config(0.5, 2000, 2000, 11);
  c.burn_in = 200;
  const PanelData p = generate_panel(c);
  const double target = 1.0 / (1.0 - 0.25) * (1.0 + 0.16) + 0.4;
  CHECK(sample_variance(p.y) == doctest::Approx(target).epsilon(0.05));

  const double early = sample_variance(p.y.leftCols(1000));
  const double late = sample_variance(p.y.rightCols(1000));
  CHECK(std::abs(early / late - 1.0) < 0.10);
}

TEST_CASE("latent autocorrelation without a factor") {
  DgpConfig c = table1_config(0.5, 1000, 1000, 12);
  c.sigma_lambda2 = 0;
  const PanelData p = generate_panel(c);
  const Matrix& ys = p.truth->y_latent;
  const Matrix cur = ys.rightCols(999).array() - ys.mean();
  const Matrix lag = ys.leftCols(999).array() - ys.mean();
  const double rho = cur.cwiseProduct(lag).sum() / cur.squaredNorm();
  CHECK(rho == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("instrument exclusion and regressor endogeneity") {
  const PanelData p = generate_panel(table1_config(0.5, 1000, 1000, 13));
  const SimulationTruth& tr = *p.truth;
  const InstrumentSet ins = build_instruments(p, 1);
  const Matrix u = ins.y - 0.5 * ins.y_lag - tr.lambda0 * tr.f0.transpose();

  const UnitMean zu = unit_clustered_mean(ins.z[0].cwiseProduct(u));
  CHECK(std::abs(zu.mean) < 3.0 * zu.se);
  const UnitMean yu = unit_clustered_mean(ins.y_lag.cwiseProduct(u));
  CHECK(yu.mean == doctest::Approx(-0.2).epsilon(0.05));
}

TEST_CASE("instrument relevance moment after projecting out the true factor") {
  const PanelData p = generate_panel(table1_config(0.5, 500, 500, 14));
  const SimulationTruth& tr = *p.truth;
  const InstrumentSet ins = build_instruments(p, 1);
  auto both = [&](const Matrix& x) -> Matrix {
    return linalg::annihilate(tr.f0, linalg::annihilate(tr.lambda0, x).transpose()).transpose();
  };
  const Matrix y_lag = both(ins.y_lag);
  const Matrix z = both(ins.z[0]);
  const double moment = y_lag.cwiseProduct(z).sum() / (500.0 * 500.0);
  AsymptoticInputs in;
  in.alpha = 0.5;
  CHECK(moment == doctest::Approx(asymptotic_G(in)(0)).epsilon(0.05));
}

TEST_CASE("second-order expansion term matches its limit") {
  const int reps = 200;
  const int n = 200;
  std::vector<double> diff;
  double mean_c2 = 0;
  double mean_limit = 0;
  for (int r = 0; r < reps; ++r) {
    const PanelData p = generate_panel(table1_config(0.5, n, n, 2000 + r));
    const SimulationTruth& tr = *p.truth;
    const InstrumentSet ins = build_instruments(p, 1);
    const Matrix u = ins.y - 0.5 * ins.y_lag - tr.lambda0 * tr.f0.transpose();
    const double c2 = c2_diagnostic(u, ins.z[0], tr.lambda0, tr.f0);
    BiasInputs bi;
    bi.alpha = 0.5;
    bi.sigma_eps2 = tr.sigma_eps2;
    bi.sigma_eta2 = tr.sigma_eta2;
    bi.f = tr.f0;
    const double limit = -1.0 * bias_b_terms(bi).second(0);  // kappa = 1
    mean_c2 += c2 / reps;
    mean_limit += limit / reps;
    diff.push_back(c2 - limit);
  }
  double var = 0;
  for (double d : diff) var += (d - (mean_c2 - mean_limit)) * (d - (mean_c2 - mean_limit));
  const double se = std::sqrt(var / (reps - 1) / reps);
  CHECK(std::abs(mean_c2 - mean_limit) < 3.0 * se);
}

TEST_CASE("profile curve is minimised near the truth") {
  const PanelData p = generate_panel(table1_config(0.5, 100, 100, 15));
  const InstrumentSet ins = build_instruments(p, 1);
  const Matrix w = Matrix::Identity(1, 1);
  double best_alpha = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 40; ++k) {
    const double a = 0.3 + 0.01 * k;
    const double v = profile_distance(ins, a, w);
    if (v < best) {
      best = v;
      best_alpha = a;
    }
  }
  CHECK(std::abs(best_alpha - 0.5) < 0.05);
}

TEST_CASE("no measurement error: eta variance is recovered as zero") {
  DgpConfig c = table1_config(0.5, 200, 200, 16);
  c.sigma_eta2 = 0;
  const LsmdFit fit = lsmd_estimate(generate_panel(c), 1);
  REQUIRE(fit.sigma_eta2_hat.has_value());
  CHECK(std::abs(*fit.sigma_eta2_hat) < 0.02);
}

TEST_CASE("no measurement error and no factor reduces to least squares") {
  DgpConfig c = table1_config(0.5, 200, 200, 17);
  c.sigma_eta2 = 0;
  c.sigma_lambda2 = 0;
  const PanelData p = generate_panel(c);
  const LsmdFit fit = lsmd_estimate(p, 1);
  const InstrumentSet ins = build_instruments(p, 1);
  const double ols = oracle::ols_ar1(ins.y, ins.y_lag);
  CHECK(std::abs(fit.alpha_hat - ols) < 0.01);
  REQUIRE(fit.se.has_value());
  CHECK(std::abs(fit.alpha_hat - 0.5) < 3.0 * *fit.se);
}

TEST_CASE("irrelevant covariate: size of the plug-in t-test") {
  int inside = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const PanelData p = generate_panel(table1_config(0.5, 50, 50, 3000 + r));
    const rng::CounterRng draw(3000 + r, rng::Stream::test);
    Matrix x(50, 50);
    for (int i = 0; i < 50; ++i) {
      for (int t = 0; t < 50; ++t) x(i, t) = draw.normal(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(t));
    }
    const LsmdFit fit = lsmd_estimate_with_covariates(p, {x}, 1);
    REQUIRE(fit.beta_se.size() == 1);
    if (std::abs(fit.inner.beta(0)) <= 3.0 * fit.beta_se(0)) ++inside;
  }
  CHECK(inside >= 90);
}

TEST_CASE("coverage of bias-corrected intervals") {
  McConfig c;
  c.alpha_grid = {0.8};
  c.sizes = {{100, 100}};
  c.reps = 300;
  c.base_seed = 5000;
  c.bias_correct = true;
  const McTable t = run_mc(c);
  REQUIRE(t.cells[0].coverage.has_value());
  MESSAGE("coverage " << *t.cells[0].coverage);
  CHECK(*t.cells[0].coverage >= 0.88);
  CHECK(*t.cells[0].coverage <= 0.99);
}
