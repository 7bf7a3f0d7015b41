#pragma once

#include <Eigen/Dense>

namespace lsmd::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ProjectorKind { onto, complement };

// Smallest singular value must exceed this fraction of the largest.
inline constexpr double kRankTolerance = 1e-10;

/// P_A = A (A'A)^{-1} A' or M_A = I - P_A. Throws RankDeficiency when A is
/// not of full column rank.
Matrix projector(const Matrix& a, ProjectorKind kind);

/// Applies M_v = I - v v'/(v'v) to each column of x without forming the N x N
/// projector. v must be nonzero.
Matrix annihilate(const Vector& v, const Matrix& x);

struct Rank1Options {
  double tol = 1e-12;
  int max_iter = 10000;
  // Power iteration restarts from a fresh vector after this many sweeps
  // without converging.
  int restart_after = 2000;
};

struct Rank1 {
  Vector u;     // unit left vector
  double s = 0; // top singular value
  Vector v;     // unit right vector, first nonzero entry positive
  int iterations = 0;
  bool converged = true;
};

/// Top singular triple of A by power iteration. `start`, if nonempty, seeds
/// the right vector. The returned triple always satisfies
/// ||A - s u v'||_F^2 = ||A||_F^2 - s^2 exactly (up to rounding).
Rank1 best_rank1(const Matrix& a, const Vector& start = Vector(), const Rank1Options& opts = {});

/// L x L matrix with entries sigma_eps2 * alpha^|i-j| / (1 - alpha^2).
Matrix ar1_toeplitz(double alpha, double sigma_eps2, int lags);

}  // namespace lsmd::linalg
