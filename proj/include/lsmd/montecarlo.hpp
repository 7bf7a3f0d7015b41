#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lsmd/dgp.hpp"
#include "lsmd/estimator.hpp"

namespace lsmd {

struct McConfig {
  std::vector<double> alpha_grid{0.2, 0.5, 0.8};
  std::vector<std::pair<int, int>> sizes{{20, 20}, {50, 50}, {100, 100}};
  int reps = 500;
  std::uint64_t base_seed = 1;
  int lags = 1;
  WeightSpec weight;
  bool bias_correct = false;
  // 0 means std::thread::hardware_concurrency().
  int parallel_workers = 0;
  // Variances, burn-in and factor options; alpha0, n, t and seed are set per rep.
  DgpConfig design = table1_config(0.5, 20, 20, 0);
  SearchSpec search;
  // Also evaluate the predicted shift -(GWG')^{-1} G W b / T at the true
  // parameters and the realised factor path of each rep.
  bool truth_shift = false;

  void validate() const;
};

struct RepRecord {
  std::uint64_t seed = 0;
  double alpha_hat = 0;
  std::optional<double> alpha_bc;
  std::optional<double> se;
  std::optional<double> truth_shift;
  bool converged = false;
  bool failed = false;
  std::string error;
  double runtime = 0;  // seconds
};

struct CellStats {
  double bias = 0;
  std::optional<double> sd;  // absent when fewer than two reps
  double rmse = 0;
  int n_used = 0;
};

struct McCell {
  double alpha0 = 0;
  int n = 0;
  int t = 0;
  int reps = 0;
  int n_converged = 0;
  int n_failed = 0;
  bool unreliable = false;  // more than 5% of reps failed
  double mean_runtime = 0;
  CellStats plain;
  std::optional<CellStats> corrected;
  std::optional<double> coverage;  // share of nominal 95% intervals covering alpha0
  std::optional<double> mean_truth_shift;
  std::optional<double> sd_truth_shift;
  std::vector<RepRecord> records;  // in rep order
};

struct McTable {
  std::vector<McCell> cells;  // alpha-major, then sizes in config order
  int reps_used = 0;
  std::vector<std::uint64_t> seed_manifest;  // seed of rep r, shared by all cells
  int workers = 1;
};

/// Bias, sample sd (reps - 1 divisor) and rmse of `values - truth`.
CellStats summarize(const std::vector<double>& values, double truth);

/// One replication: baseline design -> generate_panel -> lsmd_estimate.
RepRecord run_replication(const McConfig& config, double alpha0, int n, int t, int rep);

/// Rep r uses seed base_seed + r in every cell. Results are merged by rep
/// index, so the table does not depend on the number of workers.
McTable run_mc(const McConfig& config);

struct BiasComparison {
  double alpha0 = 0;
  int n = 0;
  int t = 0;
  CellStats plain;
  CellStats corrected;
  bool bias_reduced = false;
  bool sd_reduced = false;
};

struct PairedTable {
  McTable table;
  std::vector<BiasComparison> comparisons;
};

/// run_mc with bias correction on; statistics of alpha_hat and alpha_bc use
/// the same draws (reps where either is unavailable are dropped from both).
PairedTable compare_bias_correction(McConfig config);

/// One row per (N, T), bias/sd/rmse per alpha0.
void write_table_csv(const McTable& table, std::ostream& out, bool corrected = false);

/// alpha0,n,t,rep,seed,status
void write_seed_manifest(const McTable& table, std::ostream& out);

}  // namespace lsmd
