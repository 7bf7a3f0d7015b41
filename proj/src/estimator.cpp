#include "lsmd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "lsmd/errors.hpp"
#include "lsmd/linalg.hpp"
#include "lsmd/rng.hpp"

namespace lsmd {

namespace {

double inner_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// M_l X M_f for nonzero vectors l (N) and f (T).
Matrix double_annihilate(const Vector& l, const Vector& f, const Matrix& x) {
  const Vector lu = l / l.norm();
  const Vector fu = f / f.norm();
  Matrix out = x - lu * (lu.transpose() * x);
  out -= (out * fu) * fu.transpose();
  return out;
}

void require_positive_definite(const Matrix& w, const char* what) {
  if (w.rows() != w.cols()) throw ValidationError(std::string(what) + ": weight must be square");
  if (!w.isApprox(w.transpose(), 1e-10)) {
    throw ValidationError(std::string(what) + ": weight must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.transpose()));
  if (!(es.eigenvalues().minCoeff() > 0)) {
    throw ValidationError(std::string(what) + ": weight must be positive definite");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Step 1

InnerSolver::InnerSolver(const InstrumentSet& instruments) : ins_(instruments) {
  if (ins_.z.empty()) throw ValidationError("InnerSolver: no instruments");
  for (const Matrix& z : ins_.z) regs_.push_back(&z);
  for (const Matrix& x : ins_.x) regs_.push_back(&x);
  const auto p = static_cast<Eigen::Index>(regs_.size());

  gram_.resize(p, p);
  rty_.resize(p);
  rtylag_.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      gram_(j, k) = gram_(k, j) = inner_product(*regs_[j], *regs_[k]);
    }
    rty_(j) = inner_product(*regs_[j], ins_.y);
    rtylag_(j) = inner_product(*regs_[j], ins_.y_lag);
  }

  // Scale-free collinearity check on the correlation form of the Gram matrix.
  const Vector d = gram_.diagonal();
  if (!(d.minCoeff() > 0)) throw CollinearRegressors("a regressor is identically zero");
  const Vector dinv = d.cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Matrix> es(dinv.asDiagonal() * gram_ * dinv.asDiagonal());
  const Vector ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff())) {
    throw CollinearRegressors("instruments and covariates are collinear");
  }
  gram_llt_.compute(gram_);
}

InnerFit InnerSolver::run(double alpha, const Start& start, const InnerOptions& opts) const {
  const auto p = static_cast<Eigen::Index>(regs_.size());
  const Matrix d = ins_.y - alpha * ins_.y_lag;
  const double d2 = d.squaredNorm();
  const Vector rhs0 = rty_ - alpha * rtylag_;
  const double floor = 1e-14 * std::max(d2, std::numeric_limits<double>::min());

  Vector theta(p);
  Vector v_start;
  if (start.lambda.size() > 0) {
    Vector c(p);
    for (Eigen::Index k = 0; k < p; ++k) c(k) = start.lambda.dot(*regs_[k] * start.f);
    theta = gram_llt_.solve(rhs0 - c);
    v_start = start.f;
  } else {
    theta = start.theta;
  }

  InnerFit fit;
  fit.alpha = alpha;
  Matrix a(d.rows(), d.cols());
  linalg::Rank1 r1;
  double prev = std::numeric_limits<double>::infinity();
  double step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    fit.iterations = it;
    a = d;
    for (Eigen::Index k = 0; k < p; ++k) a.noalias() -= theta(k) * *regs_[k];
    r1 = linalg::best_rank1(a, v_start);
    v_start = r1.v;
    const double ssr = std::max(0.0, a.squaredNorm() - r1.s * r1.s);
    fit.objective_trace.push_back(ssr);
    if (std::abs(prev - ssr) <= opts.tol * std::max(ssr, floor) && step <= opts.param_tol * (1.0 + theta.norm())) {
      fit.converged = true;
      break;
    }
    prev = ssr;
    Vector c(p);
    for (Eigen::Index k = 0; k < p; ++k) c(k) = r1.s * r1.u.dot(*regs_[k] * r1.v);
    const Vector next = gram_llt_.solve(rhs0 - c);
    step = (next - theta).norm();
    theta = next;
  }

  const double root_t = std::sqrt(static_cast<double>(ins_.t_eff));
  fit.ssr = fit.objective_trace.back();
  fit.gamma = theta.head(ins_.lags);
  fit.beta = theta.tail(p - ins_.lags);
  fit.f_hat = r1.v * root_t;
  fit.lambda_hat = r1.u * (r1.s / root_t);
  return fit;
}

InnerFit InnerSolver::solve(double alpha, const InnerOptions& opts) const {
  const auto p = static_cast<Eigen::Index>(regs_.size());
  std::vector<Start> starts;
  if (opts.warm_f.size() == ins_.t_eff && opts.warm_lambda.size() == ins_.y.rows()) {
    starts.push_back({Vector(), opts.warm_lambda, opts.warm_f});
  }
  if (opts.spectral_start || (starts.empty() && opts.random_starts <= 0)) {
    starts.push_back({Vector::Zero(p), Vector(), Vector()});
  }
  rng::SequentialRng draws(opts.seed, rng::Stream::inner_start);
  for (int r = 0; r < opts.random_starts; ++r) {
    Vector theta(p);
    for (Eigen::Index k = 0; k < p; ++k) theta(k) = draws.normal();
    starts.push_back({theta, Vector(), Vector()});
  }

  std::vector<InnerFit> fits;
  fits.reserve(starts.size());
  for (const Start& s : starts) fits.push_back(run(alpha, s, opts));

  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    if (fits[i].ssr < fits[best].ssr) best = i;
  }
  InnerFit out = std::move(fits[best]);
  const double d2 = (ins_.y - alpha * ins_.y_lag).squaredNorm();
  const double slack = opts.agree_tol * std::max(out.ssr, 1e-14 * d2);
  out.n_starts = static_cast<int>(fits.size());
  out.n_starts_agreeing = 0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const double ssr = i == best ? out.ssr : fits[i].ssr;
    if (ssr <= out.ssr + slack) ++out.n_starts_agreeing;
  }
  return out;
}

Matrix InnerSolver::residuals(const InnerFit& fit) const {
  Matrix u = ins_.y - fit.alpha * ins_.y_lag - fit.lambda_hat * fit.f_hat.transpose();
  for (int l = 0; l < ins_.lags; ++l) u -= fit.gamma(l) * ins_.z[static_cast<std::size_t>(l)];
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    u -= fit.beta(k) * ins_.x[static_cast<std::size_t>(k)];
  }
  return u;
}

InnerFit inner_step(const InstrumentSet& instruments, double alpha, const InnerOptions& opts) {
  return InnerSolver(instruments).solve(alpha, opts);
}

// ---------------------------------------------------------------------------
// Weights

std::string to_string(WeightSpec::Kind kind) {
  switch (kind) {
    case WeightSpec::Kind::identity:
      return "identity";
    case WeightSpec::Kind::inverse_instrument_gram:
      return "gram";
    case WeightSpec::Kind::explicit_matrix:
      return "explicit";
  }
  return "unknown";
}

Matrix resolve_weight(const WeightSpec& spec, const InstrumentSet& instruments) {
  const int l = instruments.lags;
  switch (spec.kind) {
    case WeightSpec::Kind::identity:
      return Matrix::Identity(l, l);
    case WeightSpec::Kind::explicit_matrix:
      if (spec.matrix.rows() != l || spec.matrix.cols() != l) {
        throw ValidationError("explicit weight must be L x L");
      }
      require_positive_definite(spec.matrix, "explicit weight");
      return spec.matrix;
    case WeightSpec::Kind::inverse_instrument_gram: {
      const linalg::Rank1 lead = linalg::best_rank1(instruments.y);
      std::vector<Matrix> zt;
      for (const Matrix& z : instruments.z) zt.push_back(double_annihilate(lead.u, lead.v, z));
      const double nt = static_cast<double>(instruments.y.size());
      Matrix s(l, l);
      for (int i = 0; i < l; ++i) {
        for (int j = 0; j <= i; ++j) {
          s(i, j) = s(j, i) = inner_product(zt[static_cast<std::size_t>(i)], zt[static_cast<std::size_t>(j)]) / nt;
        }
      }
      Matrix w = s.inverse();
      w = 0.5 * (w + w.transpose());
      require_positive_definite(w, "instrument Gram weight");
      return w;
    }
  }
  throw ValidationError("unknown weight kind");
}

double profile_distance(const InstrumentSet& instruments, double alpha, const Matrix& weight,
                        const InnerOptions& opts) {
  const InnerFit fit = inner_step(instruments, alpha, opts);
  return fit.gamma.dot(weight * fit.gamma);
}

// ---------------------------------------------------------------------------
// Step 2

void SearchSpec::validate() const {
  if (!(lo > -1.0 && hi < 1.0 && lo < hi)) {
    throw ValidationError("search bracket must satisfy -1 < lo < hi < 1");
  }
  if (!(step > 0)) throw ValidationError("grid step must be positive");
  if (!(tol > 0)) throw ValidationError("search tolerance must be positive");
}

namespace {

struct Evaluation {
  double value = 0;
  Vector lambda;
  Vector f;
  bool converged = true;
};

// Values within 1e-10 (relative) are ties and go to the smallest |alpha|.
bool better(double a_alpha, double a_value, double b_alpha, double b_value) {
  const double slack = 1e-10 * std::max(std::abs(a_value), std::abs(b_value));
  if (a_value < b_value - slack) return true;
  if (b_value < a_value - slack) return false;
  return std::abs(a_alpha) < std::abs(b_alpha);
}

void fill_inference(const InnerSolver& solver, const Matrix& weight, const SearchSpec& search,
                    LsmdFit& fit) {
  const InstrumentSet& ins = solver.instruments();
  const Matrix u = solver.residuals(fit.inner);
  VarianceComponents vc;
  try {
    vc = recover_variance_components(u, fit.alpha_hat);
  } catch (const NearZeroAlpha& e) {
    fit.near_zero_alpha = true;
    fit.warnings.push_back(e.what());
    return;
  }
  fit.sigma_eps2_hat = vc.sigma_eps2;
  fit.sigma_eta2_hat = vc.sigma_eta2;
  fit.eta_clamped = vc.eta_clamped;
  fit.eps_clamped = vc.eps_clamped;
  if (vc.eta_clamped) fit.warnings.push_back("negative measurement-error variance clamped to 0");
  if (vc.eps_clamped) fit.warnings.push_back("nonpositive innovation variance clamped");

  const long n = static_cast<long>(ins.y.rows());
  const long t = ins.t_eff;
  const int lags = ins.lags;
  AsymptoticReport rep;
  rep.b = bias_b_plugin(fit.alpha_hat, vc.sigma_eps2, vc.sigma_eta2, fit.inner.f_hat, lags);

  if (search.plugin == PluginMode::closed_form) {
    AsymptoticInputs in;
    in.alpha = fit.alpha_hat;
    in.sigma_eps2 = vc.sigma_eps2;
    in.sigma_eta2 = vc.sigma_eta2;
    in.lags = lags;
    in.kappa = std::sqrt(static_cast<double>(n) / static_cast<double>(t));
    in.weight_limit = weight;
    rep.g = asymptotic_G(in);
    rep.w = asymptotic_W(in);
    rep.omega = asymptotic_Omega(in, search.omega_form);
  } else {
    const Vector& lam = fit.inner.lambda_hat;
    const Vector& f = fit.inner.f_hat;
    const double nt = static_cast<double>(n) * static_cast<double>(t);
    const Matrix ylag = double_annihilate(lam, f, ins.y_lag);
    std::vector<Matrix> zt;
    for (const Matrix& z : ins.z) zt.push_back(double_annihilate(lam, f, z));
    Matrix s(lags, lags);
    Matrix h(n, lags);
    rep.g.resize(lags);
    for (int i = 0; i < lags; ++i) {
      const Matrix& zi = zt[static_cast<std::size_t>(i)];
      rep.g(i) = inner_product(ylag, zi) / nt;
      for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = inner_product(zi, zt[static_cast<std::size_t>(j)]) / nt;
      h.col(i) = u.cwiseProduct(zi).rowwise().sum();
    }
    const Matrix sinv = s.inverse();
    rep.w = sinv * weight * sinv;
    rep.omega = h.transpose() * h / nt;
  }

  try {
    const double kappa = std::sqrt(static_cast<double>(n) / static_cast<double>(t));
    const SandwichResult sw = sandwich_inference(rep.g, rep.w, rep.omega, rep.b, kappa, n, t);
    rep.avar = sw.avar;
    rep.se_alpha = sw.se_alpha;
    rep.bias_scaled = sw.bias_scaled;
    rep.alpha_shift = sw.alpha_shift;
    rep.alpha_bc = fit.alpha_hat - sw.alpha_shift;
    fit.se = sw.se_alpha;
    fit.alpha_bc = rep.alpha_bc;
  } catch (const WeakIdentification& e) {
    fit.weak_identification = true;
    fit.warnings.push_back(e.what());
  }
  fit.report = rep;

  // Covariate standard errors from the factor-projected regressor Gram.
  const auto k = static_cast<Eigen::Index>(ins.x.size());
  if (k > 0) {
    const int p = solver.regressor_count();
    std::vector<Matrix> rt;
    for (const Matrix& z : ins.z) rt.push_back(double_annihilate(fit.inner.lambda_hat, fit.inner.f_hat, z));
    for (const Matrix& x : ins.x) rt.push_back(double_annihilate(fit.inner.lambda_hat, fit.inner.f_hat, x));
    Matrix g(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= i; ++j) {
        g(i, j) = g(j, i) = inner_product(rt[static_cast<std::size_t>(i)], rt[static_cast<std::size_t>(j)]);
      }
    }
    const double dof = static_cast<double>(n) * t - p - static_cast<double>(n + t - 1);
    if (dof > 0) {
      const double s2 = fit.inner.ssr / dof;
      const Matrix ginv = g.inverse();
      fit.beta_se.resize(k);
      for (Eigen::Index j = 0; j < k; ++j) fit.beta_se(j) = std::sqrt(s2 * ginv(lags + j, lags + j));
    }
  }
}

}  // namespace

LsmdFit lsmd_estimate(const InstrumentSet& ins, const WeightSpec& weight, const SearchSpec& search) {
  search.validate();
  const Matrix w = resolve_weight(weight, ins);
  const InnerSolver solver(ins);

  LsmdFit fit;
  fit.weight = weight;
  fit.weight_matrix = w;
  fit.n = ins.y.rows();
  fit.t_eff = ins.t_eff;
  fit.lags = ins.lags;
  fit.mode = ins.mode;

  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor((search.hi - search.lo) / search.step + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(search.lo + static_cast<double>(k) * search.step);
  if (grid.back() < search.hi - 1e-12) grid.push_back(search.hi);

  std::map<double, Evaluation> evaluated;
  InnerOptions search_opts = search.inner;
  search_opts.random_starts = search.search_random_starts;
  search_opts.spectral_start = search.search_spectral_start;

  auto evaluate = [&](double alpha, const InnerOptions& opts) -> const Evaluation& {
    const InnerFit f = solver.solve(alpha, opts);
    Evaluation e;
    e.value = f.gamma.dot(w * f.gamma);
    e.lambda = f.lambda_hat;
    e.f = f.f_hat;
    e.converged = f.converged;
    ++fit.profile_evaluations;
    return evaluated[alpha] = std::move(e);
  };
  auto warm_from = [&](double alpha) {
    InnerOptions opts = search_opts;
    if (!evaluated.empty()) {
      auto it = evaluated.lower_bound(alpha);
      if (it == evaluated.end() || (it != evaluated.begin() && alpha - std::prev(it)->first < it->first - alpha)) {
        --it;
      }
      opts.warm_lambda = it->second.lambda;
      opts.warm_f = it->second.f;
    }
    return opts;
  };

  // Coarse grid, warm-started along the sweep; the first point gets the full
  // multi-start set.
  std::size_t best_idx = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Evaluation& e = evaluate(grid[k], k == 0 ? search.inner : warm_from(grid[k]));
    const Evaluation& b = evaluated[grid[best_idx]];
    if (k > 0 && better(grid[k], e.value, grid[best_idx], b.value)) best_idx = k;
  }
  fit.boundary_minimum = best_idx == 0 || best_idx + 1 == grid.size();
  if (fit.boundary_minimum) {
    fit.warnings.push_back("profile minimum attained at the search bracket boundary");
  }

  // Golden-section refinement on the bracket formed by the grid neighbours.
  double a = grid[best_idx > 0 ? best_idx - 1 : 0];
  double b = grid[std::min(best_idx + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto value_at = [&](double x) { return evaluate(x, warm_from(x)).value; };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = value_at(c);
  double fd = value_at(d);
  while (b - a > search.tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = value_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = value_at(d);
    }
  }

  double alpha_hat = evaluated.begin()->first;
  double best_value = evaluated.begin()->second.value;
  for (const auto& [alpha, e] : evaluated) {
    if (!e.converged) fit.inner_nonconverged = true;
    if (better(alpha, e.value, alpha_hat, best_value)) {
      alpha_hat = alpha;
      best_value = e.value;
    }
  }
  if (fit.inner_nonconverged) fit.warnings.push_back("inner step did not converge at some alpha");

  InnerOptions final_opts = search.inner;
  final_opts.warm_lambda = evaluated[alpha_hat].lambda;
  final_opts.warm_f = evaluated[alpha_hat].f;
  fit.inner = solver.solve(alpha_hat, final_opts);
  fit.alpha_hat = alpha_hat;
  evaluated[alpha_hat].value = fit.inner.gamma.dot(w * fit.inner.gamma);
  if (!fit.inner.converged) fit.inner_nonconverged = true;

  fit.profile_curve.reserve(evaluated.size());
  for (const auto& [alpha, e] : evaluated) fit.profile_curve.push_back({alpha, e.value});

  if (search.inference) fill_inference(solver, w, search, fit);
  return fit;
}

LsmdFit lsmd_estimate(const PanelData& panel, int lags, const WeightSpec& weight, const SearchSpec& search) {
  const InstrumentSet ins = build_instruments(panel, lags, search.mode);
  return lsmd_estimate(ins, weight, search);
}

LsmdFit lsmd_estimate_with_covariates(const PanelData& panel, const std::vector<Matrix>& covariates,
                                      int lags, const WeightSpec& weight, const SearchSpec& search) {
  InstrumentSet ins = build_instruments(panel, lags, search.mode);
  attach_covariates(ins, covariates);
  return lsmd_estimate(ins, weight, search);
}

}  // namespace lsmd
