#include "lsmd/dgp.hpp"

#include <cmath>
#include <string>

#include "lsmd/errors.hpp"
#include "lsmd/rng.hpp"

namespace lsmd {

Matrix PanelData::full_series() const {
  Matrix out(y.rows(), pre_sample.cols() + y.cols());
  out << pre_sample, y;
  return out;
}

void DgpConfig::validate() const {
  if (!(std::abs(alpha0) < 1.0)) throw ValidationError("alpha0 must satisfy |alpha0| < 1");
  if (alpha0 == 0.0) throw ValidationError("alpha0 must be nonzero");
  if (n < 2 || t < 2) throw ValidationError("N and T must both be >= 2");
  if (sigma_eps2 < 0 || sigma_eta2 < 0 || sigma_lambda2 < 0 || sigma_f2 < 0) {
    throw ValidationError("variances must be nonnegative");
  }
  if (burn_in < 0) throw ValidationError("burn_in must be >= 0");
  if (max_lag < 0) throw ValidationError("max_lag must be >= 0");
  if (max_lag > burn_in + 1) {
    throw ValidationError("burn_in must cover the " + std::to_string(max_lag) +
                          " retained pre-sample periods");
  }
}

DgpConfig table1_config(double alpha0, int n, int t, std::uint64_t seed) {
  if (!(std::abs(alpha0) < 1.0) || alpha0 == 0.0) {
    throw ValidationError("table1_config: alpha0 must lie in (-1, 1) and be nonzero");
  }
  DgpConfig c;
  c.alpha0 = alpha0;
  c.n = n;
  c.t = t;
  c.sigma_eps2 = 1.0;
  c.sigma_eta2 = 0.4;
  c.sigma_lambda2 = 0.4;
  c.sigma_f2 = 0.4;
  c.burn_in = 100;
  c.seed = seed;
  return c;
}

PanelData generate_panel(const DgpConfig& config) {
  config.validate();
  const int n = config.n;
  const int t = config.t;
  const int pre = config.max_lag;
  const int periods = config.burn_in + 1 + t;
  const int first_kept = config.burn_in + 1 - pre;  // period index of t = -pre + 1
  const double a = config.alpha0;

  const rng::CounterRng eps_rng(config.seed, rng::Stream::epsilon);
  const rng::CounterRng eta_rng(config.seed, rng::Stream::eta);
  const rng::CounterRng load_rng(config.seed, rng::Stream::loading);
  const rng::CounterRng fac_rng(config.seed, rng::Stream::factor);

  const double sd_eps = std::sqrt(config.sigma_eps2);
  const double sd_eta = std::sqrt(config.sigma_eta2);
  const double sd_lam = std::sqrt(config.sigma_lambda2);
  const double sd_f = std::sqrt(config.sigma_f2);

  Vector f(periods);
  for (int p = 0; p < periods; ++p) {
    f(p) = config.factor_mean + sd_f * fac_rng.normal(0, static_cast<std::uint32_t>(p));
  }
  if (config.demean_factors) f.array() -= f.mean();

  Vector stock(periods);
  double acc = 0.0;
  for (int p = 0; p < periods; ++p) {
    acc = a * acc + f(p);
    stock(p) = acc;
  }

  Vector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = sd_lam * load_rng.normal(static_cast<std::uint32_t>(i), 0);

  const int kept = pre + t;
  Matrix latent(n, kept);
  Matrix observed(n, kept);
  for (int i = 0; i < n; ++i) {
    const auto unit = static_cast<std::uint32_t>(i);
    double ystar = 0.0;
    for (int p = 0; p < periods; ++p) {
      const auto per = static_cast<std::uint32_t>(p);
      ystar = a * ystar + lambda(i) * f(p) + sd_eps * eps_rng.normal(unit, per);
      if (p >= first_kept) {
        const int c = p - first_kept;
        latent(i, c) = ystar;
        observed(i, c) = ystar + sd_eta * eta_rng.normal(unit, per);
      }
    }
  }

  PanelData panel;
  panel.y = observed.rightCols(t);
  panel.pre_sample = observed.leftCols(pre);
  SimulationTruth truth;
  truth.alpha0 = a;
  truth.sigma_eps2 = config.sigma_eps2;
  truth.sigma_eta2 = config.sigma_eta2;
  truth.lambda0 = lambda;
  truth.f0 = f.tail(t);
  truth.f0_pre = f.segment(first_kept, pre);
  truth.factor_stock = stock.tail(kept);
  truth.y_latent = latent.rightCols(t);
  truth.latent_pre_sample = latent.leftCols(pre);
  panel.truth = std::move(truth);
  return panel;
}

}  // namespace lsmd
