#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lsmd/asymptotics.hpp"
#include "lsmd/errors.hpp"
#include "lsmd/linalg.hpp"
#include "oracles.hpp"

using namespace lsmd;

namespace {

AsymptoticInputs inputs(double alpha, double se2, double sh2, int lags) {
  AsymptoticInputs in;
  in.alpha = alpha;
  in.sigma_eps2 = se2;
  in.sigma_eta2 = sh2;
  in.lags = lags;
  return in;
}

double min_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("G") {
  const Vector g = asymptotic_G(inputs(0.5, 1.0, 0.4, 2));
  CHECK(g(0) == doctest::Approx(2.0 / 3.0));
  CHECK(g(1) == doctest::Approx(1.0 / 3.0));
  CHECK(asymptotic_G(inputs(0.0, 1.0, 0.4, 3)).norm() == 0.0);
  CHECK_THROWS_AS(asymptotic_G(inputs(1.0, 1.0, 0.4, 1)), DomainError);
}

TEST_CASE("W") {
  CHECK(asymptotic_W(inputs(0.5, 1.0, 0.4, 1))(0, 0) == doctest::Approx(3.0044444444).epsilon(1e-9));
  const Matrix w0 = asymptotic_W(inputs(0.0, 2.0, 0.0, 3));
  CHECK((w0 - 4.0 * Matrix::Identity(3, 3)).norm() < 1e-14);

  for (std::uint64_t k = 0; k < 20; ++k) {
    const Matrix r = oracle::random_matrix(3, 3, 70 + k);
    AsymptoticInputs in = inputs(0.7, 1.2, 0.3, 3);
    in.weight_limit = r * r.transpose() + 0.1 * Matrix::Identity(3, 3);
    const Matrix w = asymptotic_W(in);
    CHECK((w - w.transpose()).norm() < 1e-12);
    CHECK(min_eigen(w) > 0);
  }
}

TEST_CASE("Omega, displayed form") {
  const Matrix om = asymptotic_Omega(inputs(0.5, 1.0, 0.4, 1), OmegaForm::displayed);
  CHECK(om(0, 0) == doctest::Approx(1.1 * (4.0 / 3.0 + 0.4)).epsilon(1e-12));
  CHECK(om(0, 0) == doctest::Approx(1.9067).epsilon(1e-4));
}

TEST_CASE("Omega without measurement error") {
  for (OmegaForm form : {OmegaForm::exact, OmegaForm::displayed}) {
    const Matrix om = asymptotic_Omega(inputs(0.6, 1.5, 0.0, 3), form);
    CHECK((om - 1.5 * linalg::ar1_toeplitz(0.6, 1.5, 3)).norm() < 1e-12);
  }
}

TEST_CASE("Omega, exact form values") {
  // E(U^2) S - a sigma_eta2 (C + C'), L = 1: C = sigma_eps2 a / (1 - a^2).
  const double a = 0.5;
  const double s = 4.0 / 3.0 + 0.4;
  const double c = a / (1 - a * a);
  const double expected = (1.0 + 1.25 * 0.4) * s - a * 0.4 * 2.0 * c;
  CHECK(asymptotic_Omega(inputs(a, 1.0, 0.4, 1))(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(2.3333333333).epsilon(1e-9));
}

TEST_CASE("W and Omega are symmetric positive semidefinite") {
  int checked = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const Matrix u = oracle::random_matrix(1, 3, 900 + k).array().abs();
    const double alpha = std::tanh(oracle::random_matrix(1, 1, 2000 + k)(0, 0)) * 0.9;
    const double se2 = std::min(5.0, 2.0 * u(0, 0));
    const double sh2 = std::min(5.0, 2.0 * u(0, 1));
    const int lags = 1 + static_cast<int>(k % 5);
    const AsymptoticInputs in = inputs(alpha, se2, sh2, lags);
    for (OmegaForm form : {OmegaForm::exact, OmegaForm::displayed}) {
      const Matrix om = asymptotic_Omega(in, form);
      CHECK((om - om.transpose()).norm() < 1e-12);
      CHECK(min_eigen(om) > -1e-10);
    }
    const Matrix w = asymptotic_W(in);
    CHECK((w - w.transpose()).norm() < 1e-12);
    CHECK(min_eigen(w) > -1e-10);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("sandwich collapses for one lag") {
  const Vector g = Vector::Constant(1, 2.0 / 3.0);
  const Matrix om = Matrix::Constant(1, 1, 1.9067);
  const Vector b = Vector::Constant(1, 0.3);
  const SandwichResult a = sandwich_inference(g, Matrix::Identity(1, 1), om, b, 1.0, 100, 100);
  const SandwichResult c = sandwich_inference(g, Matrix::Constant(1, 1, 9.0), om, b, 1.0, 100, 100);
  CHECK(a.avar == doctest::Approx(1.9067 / (4.0 / 9.0)));
  CHECK(a.se_alpha == doctest::Approx(std::sqrt(1.9067 / (4.0 / 9.0) / 1e4)));
  CHECK(a.se_alpha == doctest::Approx(0.0207).epsilon(1e-3));
  CHECK(c.se_alpha == doctest::Approx(a.se_alpha));
  CHECK(a.alpha_shift == doctest::Approx(-0.3 / (2.0 / 3.0) / 100.0));
  CHECK(a.bias_scaled == doctest::Approx(-1.0 * 0.3 / (2.0 / 3.0)));
  CHECK_THROWS_AS(sandwich_inference(Vector::Zero(1), Matrix::Identity(1, 1), om, b, 1.0, 10, 10),
                  WeakIdentification);
}

TEST_CASE("report assembles the pieces") {
  const AsymptoticReport r = asymptotic_report(inputs(0.5, 1.0, 0.4, 2), 100, 50);
  CHECK(r.g.size() == 2);
  CHECK(r.b.norm() == 0.0);
  CHECK(r.avar > 0);
  CHECK(r.se_alpha == doctest::Approx(std::sqrt(r.avar / 5000.0)));
  CHECK(r.alpha_shift == 0.0);
}

TEST_CASE("bias vector: zero noise gives zero") {
  BiasInputs bi;
  bi.alpha = 0.5;
  bi.sigma_eps2 = 0.0;
  bi.sigma_eta2 = 0.0;
  bi.lags = 2;
  bi.f = oracle::random_matrix(12, 1, 5).col(0);
  CHECK(bias_b(bi).norm() == 0.0);
}

TEST_CASE("bias vector: missing components") {
  BiasInputs bi;
  bi.alpha = 0.5;
  bi.sigma_eps2 = 1.0;
  bi.f = Vector::Ones(5);
  CHECK_THROWS_AS(bias_b(bi), MissingComponents);
  CHECK_THROWS_AS(bias_b_plugin(0.5, 1.0, std::nullopt, Vector::Ones(5), 1), MissingComponents);
}

TEST_CASE("bias vector: hand-computed 4 x 4 trace") {
  // sigma_eta2 = 0, constant f, alpha = 0: first term is
  // sigma_eps2 tr(P_f S_{l+1}) with S_k the k-th superdiagonal shift.
  const Vector f = Vector::Ones(4);
  for (int l = 1; l <= 2; ++l) {
    BiasInputs bi;
    bi.alpha = 0.0;
    bi.sigma_eps2 = 2.0;
    bi.sigma_eta2 = 0.0;
    bi.lags = l;
    bi.f = f;
    const BiasTerms terms = bias_b_terms(bi);
    // tr(P_f S_{l+1}) = (number of entries on the (l+1)-th superdiagonal) / 4.
    const double hand = 2.0 * static_cast<double>(4 - (l + 1)) / 4.0;
    CHECK(terms.first(l - 1) == doctest::Approx(hand).epsilon(1e-14));
    CHECK(terms.first(l - 1) == doctest::Approx(oracle::first_trace_eps(f, 0.0, 2.0, l)).epsilon(1e-14));
  }
}

TEST_CASE("bias vector: first term against a dense oracle") {
  const Vector f = oracle::random_matrix(9, 1, 8).col(0);
  BiasInputs bi;
  bi.alpha = 0.7;
  bi.sigma_eps2 = 1.3;
  bi.sigma_eta2 = 0.0;
  bi.lags = 3;
  bi.f = f;
  const BiasTerms terms = bias_b_terms(bi);
  for (int l = 1; l <= 3; ++l) {
    CHECK(terms.first(l - 1) == doctest::Approx(oracle::first_trace_eps(f, 0.7, 1.3, l)).epsilon(1e-12));
  }
}

TEST_CASE("bias vector: second term against a dense oracle") {
  const Eigen::Index t = 8;
  const Vector f = oracle::random_matrix(t, 1, 9).col(0);
  const double a = 0.6;
  const double se2 = 1.0;
  const double sh2 = 0.5;
  BiasInputs bi{a, se2, sh2, 2, f};
  const BiasTerms terms = bias_b_terms(bi);
  Matrix q = (se2 + (1 + a * a) * sh2) * Matrix::Identity(t, t);
  for (Eigen::Index s = 0; s + 1 < t; ++s) q(s, s + 1) = q(s + 1, s) = -a * sh2;
  const Matrix mf = Matrix::Identity(t, t) - f * f.transpose() / f.squaredNorm();
  for (int l = 1; l <= 2; ++l) {
    Vector ftil = Vector::Zero(t);
    for (Eigen::Index s = 0; s < t; ++s) {
      for (Eigen::Index k = 0; s - 1 - l - k >= 0; ++k) ftil(s) += std::pow(a, static_cast<double>(k)) * f(s - 1 - l - k);
    }
    const double dense = (q * mf * ftil * f.transpose()).trace() / f.squaredNorm();
    CHECK(terms.second(l - 1) == doctest::Approx(dense).epsilon(1e-12));
  }
  CHECK((bias_b(bi) - terms.first - terms.second).norm() < 1e-14);
}

TEST_CASE("c2 diagnostic") {
  const Vector lam = oracle::random_matrix(5, 1, 1).col(0);
  const Vector f = oracle::random_matrix(6, 1, 2).col(0);
  const Matrix z = oracle::random_matrix(5, 6, 3);
  CHECK(c2_diagnostic(Matrix::Zero(5, 6), z, lam, f) == 0.0);
  CHECK_THROWS_AS(c2_diagnostic(Matrix::Zero(5, 6), z, Vector::Zero(5), f), DomainError);

  // N = 1: M_lambda = 0 and every trace passes through it.
  const Matrix u1 = oracle::random_matrix(1, 6, 4);
  const Matrix z1 = oracle::random_matrix(1, 6, 5);
  CHECK(std::abs(c2_diagnostic(u1, z1, Vector::Constant(1, 2.0), f)) < 1e-12);
}

TEST_CASE("relevance bound") {
  const RelevanceReport r2 = relevance_bound(0.2, 1.0, 0.4, 0.4, 0.4);
  CHECK(std::abs(r2.bound - 9.75 / 55.0625) < 1e-12);
  CHECK_FALSE(r2.satisfied);
  CHECK(relevance_bound(0.5, 1.0, 0.4, 0.4, 0.4).satisfied);
  CHECK(relevance_bound(0.8, 1.0, 0.4, 0.4, 0.4).satisfied);
  const RelevanceReport weak = relevance_bound(0.5, 1.0, 0.0, 1.0, 0.001);
  CHECK(weak.bound == doctest::Approx(1.0 / 1001.0).epsilon(1e-9));
  const RelevanceReport none = relevance_bound(0.1, 1.0, 0.4, 0.0, 0.4);
  CHECK(none.no_factor);
  CHECK(none.satisfied);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Matrix u = oracle::random_matrix(1, 4, 40 + k).array().abs() + 0.01;
    const double b = relevance_bound(0.5, u(0, 0), u(0, 1), u(0, 2), u(0, 3)).bound;
    CHECK(b > 0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("moment limits") {
  const MomentLimits m = appendix_moment_limits(0.5, 1.0, 0.4, 0.4, 0.4);
  CHECK(m.m_yz == doctest::Approx(0.773333).epsilon(1e-5));
  CHECK(m.m_zz == doctest::Approx(1.946667).epsilon(1e-5));
  CHECK(m.m_factor == doctest::Approx(0.213333).epsilon(1e-5));
  CHECK(m.margin == doctest::Approx(0.09385).epsilon(1e-3));
  CHECK(appendix_moment_limits(0.2, 1.0, 0.4, 0.4, 0.4).margin < 0);
  CHECK_THROWS_AS(appendix_moment_limits(1.0, 1.0, 0.4, 0.4, 0.4), DomainError);
}

TEST_CASE("variance components") {
  const VarianceComponents v = variance_components_from_moments(1.0 + 1.25 * 0.4, -0.5 * 0.4, 0.5);
  CHECK(v.sigma_eps2 == doctest::Approx(1.0));
  CHECK(v.sigma_eta2 == doctest::Approx(0.4));
  CHECK_FALSE(v.eta_clamped);

  const VarianceComponents c = variance_components_from_moments(1.0, 0.1, 0.5);
  CHECK(c.sigma_eta2 == 0.0);
  CHECK(c.eta_clamped);

  const VarianceComponents e = variance_components_from_moments(0.1, -0.5, 0.5);
  CHECK(e.eps_clamped);
  CHECK(e.sigma_eps2 > 0);

  CHECK_THROWS_AS(variance_components_from_moments(1.0, -0.1, 0.005), NearZeroAlpha);
  try {
    variance_components_from_moments(1.0, -0.1, 0.005);
  } catch (const NearZeroAlpha& z) {
    CHECK(z.var0() == 1.0);
    CHECK(z.cov1() == -0.1);
  }
  CHECK_THROWS_AS(recover_variance_components(Matrix::Ones(3, 2), 0.5), ValidationError);
}
