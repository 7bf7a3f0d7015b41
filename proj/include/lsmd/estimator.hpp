#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsmd/asymptotics.hpp"
#include "lsmd/panel.hpp"

namespace lsmd {

// presample: lags reach into the retained pre-sample columns when present.
// trim:      drop the first L + 1 periods (real data has no pre-sample).
enum class InstrumentMode { presample, trim };

/// Lagged-level instruments Z_l,it = Y_{i,t-1-l}, l = 1..L, on the effective
/// window, with the aligned dependent variable and its first lag.
struct InstrumentSet {
  std::vector<Matrix> z;  // L matrices, N x T_eff
  std::vector<Matrix> x;  // exogenous covariates on the same window
  Matrix y;               // N x T_eff
  Matrix y_lag;           // N x T_eff
  int lags = 0;
  int t_eff = 0;
  int alignment = 0;      // first usable column of panel.y (0-based)
  InstrumentMode mode = InstrumentMode::presample;
};

/// Throws SampleTooShort unless pre-sample + T >= L + 2.
InstrumentSet build_instruments(const PanelData& panel, int lags,
                                InstrumentMode mode = InstrumentMode::presample);

/// Appends exogenous covariates (each N x T, aligned with panel.y) cut to
/// the instrument window.
void attach_covariates(InstrumentSet& instruments, const std::vector<Matrix>& covariates);

struct InnerOptions {
  int random_starts = 5;
  bool spectral_start = true;
  double tol = 1e-12;        // relative SSR change between sweeps
  double param_tol = 1e-10;  // change of (gamma, beta) between sweeps, relative to 1 + |theta|
  int max_iter = 5000;
  double agree_tol = 1e-6;
  std::uint64_t seed = 0;
  // Warm start from a neighbouring alpha; ignored when empty.
  Vector warm_lambda;
  Vector warm_f;
};

struct InnerFit {
  double alpha = 0;
  Vector gamma;       // instrument coefficients, length L
  Vector beta;        // covariate coefficients, length K
  Vector lambda_hat;  // N
  Vector f_hat;       // T_eff, ||f_hat||^2 / T_eff = 1
  double ssr = 0;
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
  int n_starts = 0;
  int n_starts_agreeing = 0;
};

/// Step 1 for a fixed alpha: least squares of Y - alpha Y_{-1} on the
/// instruments (and covariates) with a single interactive fixed effect.
/// Moments that do not depend on alpha are computed once at construction.
class InnerSolver {
 public:
  /// Throws CollinearRegressors if the stacked regressors are collinear.
  explicit InnerSolver(const InstrumentSet& instruments);

  InnerFit solve(double alpha, const InnerOptions& opts = {}) const;

  /// Y - alpha Y_{-1} - gamma'Z - beta'X - lambda f' at the fit.
  Matrix residuals(const InnerFit& fit) const;

  const InstrumentSet& instruments() const { return ins_; }
  int regressor_count() const { return static_cast<int>(regs_.size()); }

 private:
  struct Start {
    Vector theta;   // used when lambda/f are empty
    Vector lambda;
    Vector f;
  };
  InnerFit run(double alpha, const Start& start, const InnerOptions& opts) const;

  const InstrumentSet& ins_;
  std::vector<const Matrix*> regs_;
  Matrix gram_;
  Eigen::LLT<Matrix> gram_llt_;
  Vector rty_;
  Vector rtylag_;
};

InnerFit inner_step(const InstrumentSet& instruments, double alpha, const InnerOptions& opts = {});

struct WeightSpec {
  enum class Kind { identity, inverse_instrument_gram, explicit_matrix };
  Kind kind = Kind::identity;
  Matrix matrix;  // used by explicit_matrix

  static WeightSpec identity() { return {}; }
  static WeightSpec inverse_gram() { return {Kind::inverse_instrument_gram, Matrix()}; }
  static WeightSpec explicit_weight(Matrix m) { return {Kind::explicit_matrix, std::move(m)}; }
};

std::string to_string(WeightSpec::Kind kind);

/// L x L weight W^gamma_NT. inverse_instrument_gram is
/// ((1/NT) sum vec(M_l Z M_f)' vec(M_l Z M_f))^{-1} with (l, f) the leading
/// factor pair of the aligned Y. Throws ValidationError if not positive
/// definite.
Matrix resolve_weight(const WeightSpec& spec, const InstrumentSet& instruments);

/// gamma_hat(alpha)' W gamma_hat(alpha).
double profile_distance(const InstrumentSet& instruments, double alpha, const Matrix& weight,
                        const InnerOptions& opts = {});

enum class PluginMode { closed_form, sample_moments };

struct SearchSpec {
  double lo = -0.95;
  double hi = 0.95;
  double step = 0.02;
  double tol = 1e-5;
  InstrumentMode mode = InstrumentMode::presample;
  bool inference = true;  // variance components, se and bias correction
  PluginMode plugin = PluginMode::closed_form;
  OmegaForm omega_form = OmegaForm::exact;
  // Per-alpha starts during the search; the final fit at alpha_hat always
  // uses the full multi-start set in `inner`.
  bool search_spectral_start = true;
  int search_random_starts = 0;
  InnerOptions inner;

  void validate() const;
};

struct ProfilePoint {
  double alpha = 0;
  double value = 0;
};

struct LsmdFit {
  double alpha_hat = 0;
  InnerFit inner;
  WeightSpec weight;
  Matrix weight_matrix;
  std::vector<ProfilePoint> profile_curve;  // sorted by alpha

  std::optional<double> alpha_bc;
  std::optional<double> se;
  std::optional<double> sigma_eps2_hat;
  std::optional<double> sigma_eta2_hat;
  std::optional<AsymptoticReport> report;
  Vector beta_se;  // plug-in standard errors of covariate coefficients

  long n = 0;
  int t_eff = 0;
  int lags = 0;
  InstrumentMode mode = InstrumentMode::presample;
  int profile_evaluations = 0;

  bool boundary_minimum = false;
  bool inner_nonconverged = false;
  bool eta_clamped = false;
  bool eps_clamped = false;
  bool near_zero_alpha = false;
  bool weak_identification = false;
  std::vector<std::string> warnings;
};

/// Step 2: coarse grid over [lo, hi], golden-section refinement around the
/// best grid point, then inference at alpha_hat.
LsmdFit lsmd_estimate(const PanelData& panel, int lags, const WeightSpec& weight = {},
                      const SearchSpec& search = {});

LsmdFit lsmd_estimate_with_covariates(const PanelData& panel, const std::vector<Matrix>& covariates,
                                      int lags, const WeightSpec& weight = {},
                                      const SearchSpec& search = {});

/// Lower-level entry used by the above once instruments are built.
LsmdFit lsmd_estimate(const InstrumentSet& instruments, const WeightSpec& weight,
                      const SearchSpec& search);

}  // namespace lsmd
