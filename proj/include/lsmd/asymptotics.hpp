#pragma once

#include <optional>

#include <Eigen/Dense>

namespace lsmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Which closed form to use for the long-run score variance.
//   exact:     E(U^2) S - alpha sigma_eta2 (C + C'), where C holds the lag-1
//              autocovariances Cov(Zweak_{l,t}, Zweak_{m,t-1}).
//   displayed: (sigma_eps2 + (1 - alpha)^2 sigma_eta2) S, which replaces C by
//              S and understates the variance by roughly 20% at the baseline
//              design. Kept for comparison.
enum class OmegaForm { exact, displayed };

struct AsymptoticInputs {
  double alpha = 0.5;
  double sigma_eps2 = 1.0;
  double sigma_eta2 = 0.4;
  int lags = 1;
  double kappa = 1.0;     // sqrt(N / T)
  Matrix weight_limit;    // W^gamma, L x L; empty means identity

  void validate() const;
  Matrix weight_or_identity() const;
};

struct AsymptoticReport {
  Vector g;
  Matrix w;
  Matrix omega;
  Vector b;
  double avar = 0;         // limit variance of sqrt(NT)(alpha_hat - alpha0)
  double bias_scaled = 0;  // limit mean -kappa (GWG')^{-1} G W b
  double se_alpha = 0;
  double alpha_shift = 0;  // predicted finite-sample bias of alpha_hat
  double alpha_bc = 0;
};

/// S = ar1_toeplitz(alpha, sigma_eps2, L) + sigma_eta2 I: the covariance of the
/// weak (idiosyncratic) part of the lagged instruments.
Matrix instrument_weak_covariance(double alpha, double sigma_eps2, double sigma_eta2, int lags);

/// G_l = sigma_eps2 alpha^l / (1 - alpha^2).
Vector asymptotic_G(const AsymptoticInputs& in);

/// S W^gamma S.
Matrix asymptotic_W(const AsymptoticInputs& in);

Matrix asymptotic_Omega(const AsymptoticInputs& in, OmegaForm form = OmegaForm::exact);

struct BiasInputs {
  double alpha = 0;
  std::optional<double> sigma_eps2;
  std::optional<double> sigma_eta2;
  int lags = 1;
  Vector f;  // factor path over the estimation window (any scale)
};

/// Incidental-parameter bias vector b (length L) evaluated on a finite
/// window: the expectation matrices E(eps' eps~_{-l-1}), E((eta - a eta_{-1})'
/// eta_{-l-1}) and E(U'U) are built analytically from (alpha, sigma_eps2,
/// sigma_eta2), divided by N, and combined with P_f and the geometric factor
/// lag f~_{-l-1}, whose tail truncates at the window start.
/// Throws MissingComponents if a variance is absent.
Vector bias_b(const BiasInputs& in);

struct BiasTerms {
  Vector first;   // P_f [E(eps' eps~_{-l-1}) + E((eta - a eta_{-1})' eta_{-l-1})] trace
  Vector second;  // E(U'U) M_f f~_{-l-1} (f'f)^{-1} f' trace
};

/// The two trace terms of bias_b separately; bias_b = first + second.
BiasTerms bias_b_terms(const BiasInputs& in);

/// Plug-in variant: identical to bias_b with estimated quantities; kept as a
/// separate entry point so callers state which one they mean.
Vector bias_b_plugin(double alpha_hat, std::optional<double> sigma_eps2_hat,
                     std::optional<double> sigma_eta2_hat, const Vector& f_hat, int lags);

/// Second-order term C^(2)(Z_l, U) of the expansion of gamma_hat, evaluated
/// with the true loadings and factors. Simulation diagnostic only.
double c2_diagnostic(const Matrix& u, const Matrix& z, const Vector& lambda0, const Vector& f0);

struct SandwichResult {
  double avar = 0;
  double se_alpha = 0;
  double bias_scaled = 0;
  double alpha_shift = 0;
};

/// avar = (GWG')^{-1} G W Omega W G' (GWG')^{-1}, se = sqrt(avar / (N T)),
/// alpha_shift = -(GWG')^{-1} G W b / T. Throws WeakIdentification when GWG'
/// is not positive.
SandwichResult sandwich_inference(const Vector& g, const Matrix& w, const Matrix& omega,
                                  const Vector& b, double kappa, long n, long t);

/// Full closed-form report at the given inputs; b defaults to zero (its
/// limit when the factor is serially independent with mean zero).
AsymptoticReport asymptotic_report(const AsymptoticInputs& in, long n, long t,
                                   const Vector& b = Vector(), OmegaForm form = OmegaForm::exact);

struct RelevanceReport {
  double bound = 0;
  bool satisfied = false;
  // True when Sigma_lambda Sigma_f = 0 and only alpha != 0 is required.
  bool no_factor = false;
};

/// Closed-form sufficient condition for instrument relevance (L = 1, serially
/// independent mean-zero factor): alpha^2 > (1 + a + c) / ((1 + a)^2 + c) with
/// a = sigma_eps2 / (Sigma_lambda Sigma_f), c = sigma_eta2 / (Sigma_lambda Sigma_f).
RelevanceReport relevance_bound(double alpha, double sigma_eps2, double sigma_eta2,
                                double sigma_lambda2, double sigma_f2);

struct MomentLimits {
  double m_yz = 0;      // plim (1/NT) y_{-1}' z
  double m_zz = 0;      // plim (1/NT) z' z
  double m_factor = 0;  // plim max_lambda (1/NT) y_{-1}' P y_{-1}
  double margin = 0;    // m_yz^2 / m_zz - m_factor
};

MomentLimits appendix_moment_limits(double alpha, double sigma_eps2, double sigma_eta2,
                                    double sigma_lambda2, double sigma_f2);

struct VarianceComponents {
  double sigma_eps2 = 0;
  double sigma_eta2 = 0;
  double var0 = 0;
  double cov1 = 0;
  bool eta_clamped = false;
  bool eps_clamped = false;
};

/// Inverts Var(U) = sigma_eps2 + (1 + a^2) sigma_eta2 and
/// Cov(U_t, U_{t-1}) = -a sigma_eta2. Throws NearZeroAlpha for |a| <= 0.01.
VarianceComponents variance_components_from_moments(double var0, double cov1, double alpha);

/// Same inversion from a residual matrix (N x T, T >= 3).
VarianceComponents recover_variance_components(const Matrix& residuals, double alpha_hat);

}  // namespace lsmd
