#pragma once

#include <cstdint>

#include "lsmd/panel.hpp"

namespace lsmd {

// Y*_it = alpha0 Y*_{i,t-1} + lambda_i f_t + eps_it,  Y_it = Y*_it + eta_it.
struct DgpConfig {
  double alpha0 = 0.5;
  int n = 50;
  int t = 50;
  double sigma_eps2 = 1.0;
  double sigma_eta2 = 0.4;
  double sigma_lambda2 = 0.4;
  double sigma_f2 = 0.4;
  int burn_in = 100;
  std::uint64_t seed = 0;
  // Observed pre-sample columns kept for instruments (L + 1 for L lags).
  int max_lag = 2;
  // Subtract the sample mean of the simulated factor path.
  bool demean_factors = false;
  // Location of the factor draws; nonzero only for robustness experiments.
  double factor_mean = 0.0;

  /// Throws ValidationError on a malformed configuration.
  void validate() const;

  bool operator==(const DgpConfig&) const = default;
};

/// Baseline simulation design: eps ~ N(0,1) and
/// lambda, f, eta ~ N(0,0.4), 100 burn-in periods.
DgpConfig table1_config(double alpha0, int n, int t, std::uint64_t seed);

/// Simulates periods t = -burn_in, ..., T from Y*_{i,-burn_in-1} = 0.
///
/// Draws are addressed by (seed, stream, unit, period index) with the period
/// index counted from the first simulated period, so a panel is a pure
/// function of its configuration and extending T leaves earlier draws
/// unchanged.
PanelData generate_panel(const DgpConfig& config);

}  // namespace lsmd
