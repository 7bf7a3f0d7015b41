#include "lsmd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <thread>

#include "lsmd/errors.hpp"

namespace lsmd {

void McConfig::validate() const {
  if (reps < 1) throw ValidationError("reps must be >= 1");
  if (lags < 1) throw ValidationError("L must be >= 1");
  if (alpha_grid.empty() || sizes.empty()) throw ValidationError("empty alpha grid or size list");
  for (double a : alpha_grid) {
    if (!(std::abs(a) < 1.0) || a == 0.0) throw DomainError("alpha0 grid values must lie in (-1, 1) \\ {0}");
  }
  for (const auto& [n, t] : sizes) {
    if (n < 2 || t < 2) throw ValidationError("N and T must be >= 2");
  }
  if (parallel_workers < 0) throw ValidationError("parallel_workers must be >= 0");
  search.validate();
}

CellStats summarize(const std::vector<double>& values, double truth) {
  CellStats s;
  s.n_used = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0;
  double sq = 0;
  for (double v : values) {
    sum += v - truth;
    sq += (v - truth) * (v - truth);
  }
  const double m = static_cast<double>(values.size());
  s.bias = sum / m;
  s.rmse = std::sqrt(sq / m);
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - truth - s.bias) * (v - truth - s.bias);
    s.sd = std::sqrt(ss / (m - 1));
  }
  return s;
}

RepRecord run_replication(const McConfig& config, double alpha0, int n, int t, int rep) {
  RepRecord rec;
  rec.seed = config.base_seed + static_cast<std::uint64_t>(rep);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    DgpConfig dgp = config.design;
    dgp.alpha0 = alpha0;
    dgp.n = n;
    dgp.t = t;
    dgp.seed = rec.seed;
    dgp.max_lag = std::max(dgp.max_lag, config.lags + 1);
    const PanelData panel = generate_panel(dgp);

    SearchSpec search = config.search;
    search.inference = search.inference || config.bias_correct;
    search.inner.seed = rec.seed;
    const LsmdFit fit = lsmd_estimate(panel, config.lags, config.weight, search);
    rec.alpha_hat = fit.alpha_hat;
    rec.se = fit.se;
    if (config.bias_correct) rec.alpha_bc = fit.alpha_bc;
    rec.converged = fit.inner.converged && !fit.inner_nonconverged;

    if (config.truth_shift) {
      const SimulationTruth& truth = *panel.truth;
      AsymptoticInputs in;
      in.alpha = alpha0;
      in.sigma_eps2 = truth.sigma_eps2;
      in.sigma_eta2 = truth.sigma_eta2;
      in.lags = config.lags;
      in.kappa = std::sqrt(static_cast<double>(n) / fit.t_eff);
      in.weight_limit = fit.weight_matrix;
      BiasInputs bi;
      bi.alpha = alpha0;
      bi.sigma_eps2 = truth.sigma_eps2;
      bi.sigma_eta2 = truth.sigma_eta2;
      bi.lags = config.lags;
      bi.f = truth.f0.tail(fit.t_eff);
      const AsymptoticReport rep_truth =
          asymptotic_report(in, n, fit.t_eff, bias_b(bi), config.search.omega_form);
      rec.truth_shift = rep_truth.alpha_shift;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.converged = false;
    rec.error = e.what();
  }
  rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

void finish_cell(McCell& cell, bool bias_correct) {
  std::vector<double> est;
  std::vector<double> bc;
  std::vector<double> shift;
  int covered = 0;
  int with_se = 0;
  double runtime = 0;
  for (const RepRecord& r : cell.records) {
    runtime += r.runtime;
    if (r.failed) {
      ++cell.n_failed;
      continue;
    }
    if (r.converged) ++cell.n_converged;
    est.push_back(r.alpha_hat);
    if (r.alpha_bc) bc.push_back(*r.alpha_bc);
    if (r.truth_shift) shift.push_back(*r.truth_shift);
    if (r.se) {
      ++with_se;
      const double centre = r.alpha_bc ? *r.alpha_bc : r.alpha_hat;
      if (std::abs(centre - cell.alpha0) <= 1.959963984540054 * *r.se) ++covered;
    }
  }
  cell.mean_runtime = runtime / cell.reps;
  cell.unreliable = cell.n_failed > 0.05 * cell.reps;
  cell.plain = summarize(est, cell.alpha0);
  if (bias_correct) cell.corrected = summarize(bc, cell.alpha0);
  if (with_se > 0) cell.coverage = static_cast<double>(covered) / with_se;
  if (!shift.empty()) {
    const CellStats s = summarize(shift, 0.0);
    cell.mean_truth_shift = s.bias;
    cell.sd_truth_shift = s.sd;
  }
}

}  // namespace

McTable run_mc(const McConfig& config) {
  config.validate();
  McTable table;
  table.reps_used = config.reps;
  for (int r = 0; r < config.reps; ++r) table.seed_manifest.push_back(config.base_seed + static_cast<std::uint64_t>(r));
  for (double a : config.alpha_grid) {
    for (const auto& [n, t] : config.sizes) {
      McCell cell;
      cell.alpha0 = a;
      cell.n = n;
      cell.t = t;
      cell.reps = config.reps;
      cell.records.resize(static_cast<std::size_t>(config.reps));
      table.cells.push_back(std::move(cell));
    }
  }

  const std::size_t tasks = table.cells.size() * static_cast<std::size_t>(config.reps);
  unsigned workers = config.parallel_workers > 0 ? static_cast<unsigned>(config.parallel_workers)
                                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
  table.workers = static_cast<int>(workers);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < tasks; k = next++) {
      McCell& cell = table.cells[k / static_cast<std::size_t>(config.reps)];
      const int rep = static_cast<int>(k % static_cast<std::size_t>(config.reps));
      cell.records[static_cast<std::size_t>(rep)] = run_replication(config, cell.alpha0, cell.n, cell.t, rep);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  for (McCell& cell : table.cells) finish_cell(cell, config.bias_correct);
  return table;
}

PairedTable compare_bias_correction(McConfig config) {
  config.bias_correct = true;
  PairedTable out;
  out.table = run_mc(config);
  for (const McCell& cell : out.table.cells) {
    std::vector<double> plain;
    std::vector<double> corrected;
    for (const RepRecord& r : cell.records) {
      if (r.failed || !r.alpha_bc) continue;
      plain.push_back(r.alpha_hat);
      corrected.push_back(*r.alpha_bc);
    }
    BiasComparison c;
    c.alpha0 = cell.alpha0;
    c.n = cell.n;
    c.t = cell.t;
    c.plain = summarize(plain, cell.alpha0);
    c.corrected = summarize(corrected, cell.alpha0);
    c.bias_reduced = std::abs(c.corrected.bias) <= std::abs(c.plain.bias);
    c.sd_reduced = c.corrected.sd && c.plain.sd && *c.corrected.sd <= *c.plain.sd;
    out.comparisons.push_back(c);
  }
  return out;
}

void write_table_csv(const McTable& table, std::ostream& out, bool corrected) {
  std::vector<double> alphas;
  std::vector<std::pair<int, int>> sizes;
  for (const McCell& c : table.cells) {
    if (std::find(alphas.begin(), alphas.end(), c.alpha0) == alphas.end()) alphas.push_back(c.alpha0);
    if (std::find(sizes.begin(), sizes.end(), std::make_pair(c.n, c.t)) == sizes.end()) sizes.emplace_back(c.n, c.t);
  }
  out << "N,T";
  for (double a : alphas) out << ",bias(" << a << "),sd(" << a << "),rmse(" << a << ")";
  out << '\n';
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(6);
  for (const auto& [n, t] : sizes) {
    out << n << ',' << t;
    for (double a : alphas) {
      const auto it = std::find_if(table.cells.begin(), table.cells.end(),
                                   [&](const McCell& c) { return c.alpha0 == a && c.n == n && c.t == t; });
      const CellStats* s = nullptr;
      if (it != table.cells.end()) s = corrected ? (it->corrected ? &*it->corrected : nullptr) : &it->plain;
      if (s == nullptr || s->n_used == 0) {
        out << ",NA,NA,NA";
        continue;
      }
      out << ',' << s->bias << ',';
      if (s->sd) {
        out << *s->sd;
      } else {
        out << "NA";
      }
      out << ',' << s->rmse;
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void write_seed_manifest(const McTable& table, std::ostream& out) {
  out << "alpha0,n,t,rep,seed,status\n";
  for (const McCell& c : table.cells) {
    for (std::size_t r = 0; r < c.records.size(); ++r) {
      const RepRecord& rec = c.records[r];
      out << c.alpha0 << ',' << c.n << ',' << c.t << ',' << r << ',' << rec.seed << ','
          << (rec.failed ? "failed" : rec.converged ? "ok" : "nonconverged") << '\n';
    }
  }
}

}  // namespace lsmd
