#include "lsmd/linalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lsmd/errors.hpp"

namespace lsmd::linalg {

Matrix projector(const Matrix& a, ProjectorKind kind) {
  if (a.rows() == 0 || a.cols() == 0) throw DomainError("projector: empty basis matrix");
  if (a.cols() > a.rows()) {
    throw RankDeficiency("projector: more columns than rows", 0.0);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double largest = sv(0);
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > kRankTolerance * largest)) {
    std::ostringstream msg;
    msg << "projector: basis is rank deficient (smallest singular value " << smallest << ")";
    throw RankDeficiency(msg.str(), smallest);
  }
  const Matrix& u = svd.matrixU();
  Matrix p = u * u.transpose();
  if (kind == ProjectorKind::complement) {
    p = Matrix::Identity(a.rows(), a.rows()) - p;
  }
  return p;
}

Matrix annihilate(const Vector& v, const Matrix& x) {
  const double vv = v.squaredNorm();
  if (!(vv > 0)) throw DomainError("annihilate: zero direction vector");
  return x - v * ((v.transpose() * x) / vv);
}

namespace {

void fix_sign(Rank1& r) {
  const double scale = r.v.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < r.v.size(); ++j) {
    if (std::abs(r.v(j)) > 1e-8 * scale) {
      if (r.v(j) < 0) {
        r.v = -r.v;
        r.u = -r.u;
      }
      return;
    }
  }
}

// Finalize from a right vector: u = A v / ||A v||, s = ||A v||. This makes
// the reconstruction identity hold for whatever v was reached.
void finish_from_v(const Matrix& a, Rank1& r) {
  r.u = a * r.v;
  r.s = r.u.norm();
  if (r.s > 0) {
    r.u /= r.s;
  } else {
    r.u = Vector::Unit(a.rows(), 0);
  }
  fix_sign(r);
}

Vector dense_top_right_vector(const Matrix& a) {
  if (a.cols() <= a.rows()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
    return es.eigenvectors().col(a.cols() - 1);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a * a.transpose());
  Vector v = a.transpose() * es.eigenvectors().col(a.rows() - 1);
  const double n = v.norm();
  return n > 0 ? Vector(v / n) : Vector(Vector::Unit(a.cols(), 0));
}

}  // namespace

Rank1 best_rank1(const Matrix& a, const Vector& start, const Rank1Options& opts) {
  Rank1 r;
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (a.squaredNorm() == 0.0) {
    r.u = Vector::Unit(rows, 0);
    r.v = Vector::Unit(cols, 0);
    r.s = 0.0;
    return r;
  }

  if (start.size() == cols && start.norm() > 0) {
    r.v = start / start.norm();
  } else {
    Eigen::Index best_row = 0;
    a.rowwise().squaredNorm().maxCoeff(&best_row);
    r.v = a.row(best_row).transpose();
    r.v.normalize();
  }

  Vector u(rows);
  double s_prev = -1.0;
  r.converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    r.iterations = it;
    u.noalias() = a * r.v;
    const double su = u.norm();
    if (su == 0.0) break;
    u /= su;
    r.v.noalias() = a.transpose() * u;
    const double s = r.v.norm();
    r.v /= s;
    if (std::abs(s - s_prev) <= opts.tol * s) {
      r.converged = true;
      break;
    }
    s_prev = s;
    if (it % opts.restart_after == 0) break;
  }
  if (!r.converged) {
    // Stagnation (tiny spectral gap) or an unlucky start: take the exact
    // top eigenvector of the smaller Gram matrix instead.
    r.v = dense_top_right_vector(a);
    r.converged = true;
  }
  finish_from_v(a, r);
  return r;
}

Matrix ar1_toeplitz(double alpha, double sigma_eps2, int lags) {
  if (!(std::abs(alpha) < 1.0)) throw DomainError("ar1_toeplitz: |alpha| must be < 1");
  if (lags < 1) throw DomainError("ar1_toeplitz: L must be >= 1");
  if (sigma_eps2 < 0) throw DomainError("ar1_toeplitz: negative variance");
  const double scale = sigma_eps2 / (1.0 - alpha * alpha);
  Matrix m(lags, lags);
  for (int i = 0; i < lags; ++i) {
    for (int j = 0; j < lags; ++j) {
      m(i, j) = scale * std::pow(alpha, std::abs(i - j));
    }
  }
  return m;
}

}  // namespace lsmd::linalg
