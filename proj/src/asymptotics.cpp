#include "lsmd/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "lsmd/errors.hpp"
#include "lsmd/linalg.hpp"

namespace lsmd {

void AsymptoticInputs::validate() const {
  if (!(std::abs(alpha) < 1.0)) throw DomainError("asymptotics: |alpha| must be < 1");
  if (sigma_eps2 < 0 || sigma_eta2 < 0) throw DomainError("asymptotics: negative variance");
  if (lags < 1) throw DomainError("asymptotics: L must be >= 1");
  if (!(kappa > 0)) throw DomainError("asymptotics: kappa must be positive");
  if (weight_limit.size() != 0 && (weight_limit.rows() != lags || weight_limit.cols() != lags)) {
    throw DomainError("asymptotics: weight matrix must be L x L");
  }
}

Matrix AsymptoticInputs::weight_or_identity() const {
  if (weight_limit.size() == 0) return Matrix::Identity(lags, lags);
  return weight_limit;
}

Matrix instrument_weak_covariance(double alpha, double sigma_eps2, double sigma_eta2, int lags) {
  Matrix s = linalg::ar1_toeplitz(alpha, sigma_eps2, lags);
  s.diagonal().array() += sigma_eta2;
  return s;
}

Vector asymptotic_G(const AsymptoticInputs& in) {
  in.validate();
  Vector g(in.lags);
  const double scale = in.sigma_eps2 / (1.0 - in.alpha * in.alpha);
  for (int l = 1; l <= in.lags; ++l) g(l - 1) = scale * std::pow(in.alpha, l);
  return g;
}

Matrix asymptotic_W(const AsymptoticInputs& in) {
  in.validate();
  const Matrix s = instrument_weak_covariance(in.alpha, in.sigma_eps2, in.sigma_eta2, in.lags);
  Matrix w = s * in.weight_or_identity() * s;
  return 0.5 * (w + w.transpose());
}

Matrix asymptotic_Omega(const AsymptoticInputs& in, OmegaForm form) {
  in.validate();
  const double a = in.alpha;
  const double se2 = in.sigma_eps2;
  const double sh2 = in.sigma_eta2;
  const Matrix s = instrument_weak_covariance(a, se2, sh2, in.lags);
  if (form == OmegaForm::displayed) {
    return (se2 + (1.0 - a) * (1.0 - a) * sh2) * s;
  }
  // Lag-1 cross moments: C_lm = Cov(Zweak_{l,t}, Zweak_{m,t-1}).
  const int n = in.lags;
  Matrix c(n, n);
  const double scale = se2 / (1.0 - a * a);
  for (int l = 1; l <= n; ++l) {
    for (int m = 1; m <= n; ++m) {
      c(l - 1, m - 1) = scale * std::pow(a, std::abs(m + 1 - l)) + (l == m + 1 ? sh2 : 0.0);
    }
  }
  const double eu2 = se2 + (1.0 + a * a) * sh2;
  return eu2 * s - a * sh2 * (c + c.transpose());
}

BiasTerms bias_b_terms(const BiasInputs& in) {
  if (!in.sigma_eps2 || !in.sigma_eta2) {
    throw MissingComponents("bias_b: variance components are required");
  }
  if (!(std::abs(in.alpha) < 1.0)) throw DomainError("bias_b: |alpha| must be < 1");
  if (in.lags < 1) throw DomainError("bias_b: L must be >= 1");
  const Vector& f = in.f;
  const double ff = f.squaredNorm();
  if (!(ff > 0)) throw DomainError("bias_b: factor path has zero norm");

  const double a = in.alpha;
  const double se2 = *in.sigma_eps2;
  const double sh2 = *in.sigma_eta2;
  const Eigen::Index t = f.size();
  const double c0 = se2 + (1.0 + a * a) * sh2;

  BiasTerms b{Vector(in.lags), Vector(in.lags)};
  for (int l = 1; l <= in.lags; ++l) {
    // f' E(eps' eps~_{-l-1}) f / N via h_t = sum_{t' >= t+l+1} a^{t'-t-l-1} f_{t'}.
    double quad_eps = 0.0;
    double h = 0.0;
    for (Eigen::Index s = t - 1; s >= 0; --s) {
      const Eigen::Index lead = s + l + 1;
      h = lead < t ? f(lead) + a * h : 0.0;
      quad_eps += f(s) * h;
    }
    double quad_eta = 0.0;
    for (Eigen::Index s = 0; s + l + 1 < t; ++s) quad_eta += f(s) * f(s + l + 1);
    for (Eigen::Index s = 0; s + l < t; ++s) quad_eta -= a * f(s) * f(s + l);
    const double first = (se2 * quad_eps + sh2 * quad_eta) / ff;

    // f~_{-l-1}, truncated at the window start.
    Vector ftil = Vector::Zero(t);
    for (Eigen::Index s = 0; s < t; ++s) {
      const Eigen::Index src = s - 1 - l;
      const double prev = s > 0 ? ftil(s - 1) : 0.0;
      ftil(s) = src >= 0 ? f(src) + a * prev : 0.0;
    }
    const Vector mf_ftil = ftil - f * (f.dot(ftil) / ff);
    // E(U'U)/N = c0 I - a sigma_eta2 (shift + shift').
    Vector q = c0 * mf_ftil;
    for (Eigen::Index s = 0; s < t; ++s) {
      double nb = 0.0;
      if (s > 0) nb += mf_ftil(s - 1);
      if (s + 1 < t) nb += mf_ftil(s + 1);
      q(s) -= a * sh2 * nb;
    }
    const double second = f.dot(q) / ff;
    b.first(l - 1) = first;
    b.second(l - 1) = second;
  }
  return b;
}

Vector bias_b(const BiasInputs& in) {
  const BiasTerms terms = bias_b_terms(in);
  return terms.first + terms.second;
}

Vector bias_b_plugin(double alpha_hat, std::optional<double> sigma_eps2_hat,
                     std::optional<double> sigma_eta2_hat, const Vector& f_hat, int lags) {
  BiasInputs in;
  in.alpha = alpha_hat;
  in.sigma_eps2 = sigma_eps2_hat;
  in.sigma_eta2 = sigma_eta2_hat;
  in.lags = lags;
  in.f = f_hat;
  return bias_b(in);
}

double c2_diagnostic(const Matrix& u, const Matrix& z, const Vector& lambda0, const Vector& f0) {
  const Eigen::Index n = u.rows();
  const Eigen::Index t = u.cols();
  if (z.rows() != n || z.cols() != t || lambda0.size() != n || f0.size() != t) {
    throw DomainError("c2_diagnostic: nonconformable inputs");
  }
  const double ll = lambda0.squaredNorm();
  const double ff = f0.squaredNorm();
  if (!(ll > 0) || !(ff > 0)) throw DomainError("c2_diagnostic: zero-norm loading or factor");

  auto m_lambda = [&](const Vector& x) -> Vector { return x - lambda0 * (lambda0.dot(x) / ll); };
  auto m_f = [&](const Vector& x) -> Vector { return x - f0 * (f0.dot(x) / ff); };

  // tr(U M_f U' M_lambda Z f (f'f)^{-1} (l'l)^{-1} l')
  const Vector a1 = m_lambda(z * f0);
  const double term_a = lambda0.dot(u * m_f(u.transpose() * a1));
  // tr(U' M_lambda U M_f Z' l (l'l)^{-1} (f'f)^{-1} f')
  const Vector b1 = m_f(z.transpose() * lambda0);
  const double term_b = f0.dot(u.transpose() * m_lambda(u * b1));
  // tr(U' M_lambda Z M_f U' l (l'l)^{-1} (f'f)^{-1} f')
  const Vector c1 = m_f(u.transpose() * lambda0);
  const double term_c = f0.dot(u.transpose() * m_lambda(z * c1));

  const double scale = 1.0 / (ll * ff * std::sqrt(static_cast<double>(n) * static_cast<double>(t)));
  return -(term_a + term_b + term_c) * scale;
}

SandwichResult sandwich_inference(const Vector& g, const Matrix& w, const Matrix& omega,
                                  const Vector& b, double kappa, long n, long t) {
  const Eigen::Index l = g.size();
  if (w.rows() != l || w.cols() != l || omega.rows() != l || omega.cols() != l || b.size() != l) {
    throw DomainError("sandwich_inference: nonconformable inputs");
  }
  if (n < 1 || t < 1) throw DomainError("sandwich_inference: N and T must be positive");
  const Vector wg = w * g;
  const double gwg = g.dot(wg);
  if (!(gwg > 1e-12 * std::max(1.0, w.norm()))) {
    throw WeakIdentification("sandwich_inference: GWG' is not positive; instruments are irrelevant");
  }
  SandwichResult r;
  r.avar = wg.dot(omega * wg) / (gwg * gwg);
  r.se_alpha = std::sqrt(r.avar / (static_cast<double>(n) * static_cast<double>(t)));
  const double gwb = wg.dot(b);
  r.bias_scaled = -kappa * gwb / gwg;
  r.alpha_shift = -gwb / gwg / static_cast<double>(t);
  return r;
}

AsymptoticReport asymptotic_report(const AsymptoticInputs& in, long n, long t, const Vector& b,
                                   OmegaForm form) {
  AsymptoticReport r;
  r.g = asymptotic_G(in);
  r.w = asymptotic_W(in);
  r.omega = asymptotic_Omega(in, form);
  r.b = b.size() == 0 ? Vector(Vector::Zero(in.lags)) : b;
  const SandwichResult s = sandwich_inference(r.g, r.w, r.omega, r.b, in.kappa, n, t);
  r.avar = s.avar;
  r.se_alpha = s.se_alpha;
  r.bias_scaled = s.bias_scaled;
  r.alpha_shift = s.alpha_shift;
  r.alpha_bc = in.alpha - s.alpha_shift;
  return r;
}

RelevanceReport relevance_bound(double alpha, double sigma_eps2, double sigma_eta2,
                                double sigma_lambda2, double sigma_f2) {
  if (sigma_eps2 < 0 || sigma_eta2 < 0 || sigma_lambda2 < 0 || sigma_f2 < 0) {
    throw DomainError("relevance_bound: negative variance");
  }
  if (!(std::abs(alpha) < 1.0)) throw DomainError("relevance_bound: |alpha| must be < 1");
  RelevanceReport r;
  const double s = sigma_lambda2 * sigma_f2;
  if (s == 0.0) {
    r.no_factor = true;
    r.bound = 0.0;
    r.satisfied = alpha != 0.0;
    return r;
  }
  const double a = sigma_eps2 / s;
  const double c = sigma_eta2 / s;
  r.bound = (1.0 + a + c) / ((1.0 + a) * (1.0 + a) + c);
  r.satisfied = alpha * alpha > r.bound;
  return r;
}

MomentLimits appendix_moment_limits(double alpha, double sigma_eps2, double sigma_eta2,
                                    double sigma_lambda2, double sigma_f2) {
  if (!(std::abs(alpha) < 1.0)) throw DomainError("appendix_moment_limits: |alpha| must be < 1");
  const double s = sigma_lambda2 * sigma_f2;
  const double inv = 1.0 / (1.0 - alpha * alpha);
  MomentLimits m;
  m.m_yz = alpha * inv * (sigma_eps2 + s);
  m.m_zz = inv * (sigma_eps2 + s) + sigma_eta2;
  m.m_factor = inv * s;
  m.margin = m.m_yz * m.m_yz / m.m_zz - m.m_factor;
  return m;
}

VarianceComponents variance_components_from_moments(double var0, double cov1, double alpha) {
  if (!(std::abs(alpha) > 0.01)) {
    throw NearZeroAlpha("variance recovery needs |alpha_hat| > 0.01", var0, cov1);
  }
  VarianceComponents v;
  v.var0 = var0;
  v.cov1 = cov1;
  v.sigma_eta2 = -cov1 / alpha;
  if (v.sigma_eta2 < 0) {
    v.sigma_eta2 = 0.0;
    v.eta_clamped = true;
  }
  v.sigma_eps2 = var0 - (1.0 + alpha * alpha) * v.sigma_eta2;
  const double floor = std::numeric_limits<double>::epsilon() * std::max(std::abs(var0), 1.0);
  if (v.sigma_eps2 < floor) {
    v.sigma_eps2 = floor;
    v.eps_clamped = true;
  }
  return v;
}

VarianceComponents recover_variance_components(const Matrix& residuals, double alpha_hat) {
  const Eigen::Index t = residuals.cols();
  if (t < 3 || residuals.rows() < 1) {
    throw ValidationError("variance recovery needs at least 3 periods");
  }
  const double var0 = residuals.squaredNorm() / static_cast<double>(residuals.size());
  const double cov1 = (residuals.rightCols(t - 1).array() * residuals.leftCols(t - 1).array()).sum() /
                      static_cast<double>(residuals.rows() * (t - 1));
  return variance_components_from_moments(var0, cov1, alpha_hat);
}

}  // namespace lsmd
