#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lsmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Latent quantities known only for simulated panels.
struct SimulationTruth {
  double alpha0 = 0;
  double sigma_eps2 = 0;
  double sigma_eta2 = 0;
  Vector lambda0;            // N
  Vector f0;                 // T, sample periods
  Vector f0_pre;             // P, pre-sample periods (oldest first)
  // F_t = sum_s alpha0^s f_{t-s} over the P pre-sample and T sample periods,
  // accumulated from the zero start, so Y*_{it} = lambda_i F_t + (AR part).
  Vector factor_stock;       // P + T
  Matrix y_latent;           // N x T
  Matrix latent_pre_sample;  // N x P
};

/// Balanced N x T panel. Columns of `pre_sample` are the observed values at
/// t = -P+1, ..., 0 (oldest first) and feed lagged instruments.
struct PanelData {
  Matrix y;
  Matrix pre_sample;
  std::vector<long> unit_ids;   // length N when read from file
  std::vector<long> time_ids;   // length T when read from file
  std::vector<Matrix> covariates;  // each N x T
  std::vector<std::string> covariate_names;
  std::optional<SimulationTruth> truth;

  Eigen::Index n() const { return y.rows(); }
  Eigen::Index t() const { return y.cols(); }
  Eigen::Index pre_periods() const { return pre_sample.cols(); }

  /// [pre_sample | y], N x (P + T).
  Matrix full_series() const;
};

}  // namespace lsmd
