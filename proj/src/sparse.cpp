// SPDX-License-Identifier: Apache-2.0
#include "sparsedet/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparsedet/errors.hpp"

namespace sparsedet {

ScmEstimate::ScmEstimate(const TrainingSet& training) : k_(training.size()) {
  const auto n = training.samples.rows();
  if (n < 1) throw EstimationError("training vectors are empty");
  if (k_ < n) throw EstimationError("sample covariance needs K >= N training vectors");
  matrix_ = CMatrix::Zero(n, n);
  matrix_.selfadjointView<Eigen::Lower>().rankUpdate(training.samples, 1.0 / k_);
  matrix_ = matrix_.selfadjointView<Eigen::Lower>();
  factorize();
}

ScmEstimate::ScmEstimate(CMatrix matrix, int k, bool) : matrix_(std::move(matrix)), k_(k) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
    throw EstimationError("covariance must be a non-empty square matrix");
  factorize();
}

ScmEstimate ScmEstimate::from_matrix(CMatrix matrix, int k) {
  return ScmEstimate(std::move(matrix), k, true);
}

void ScmEstimate::factorize() {
  Eigen::LLT<CMatrix> llt(matrix_);
  if (llt.info() != Eigen::Success) throw EstimationError("sample covariance is not positive definite");
  factor_ = llt.matrixL();
  const double scale = matrix_.diagonal().real().maxCoeff();
  const double min_pivot = factor_.diagonal().real().minCoeff();
  if (!(scale > 0.0) || !(min_pivot * min_pivot > 1e-14 * scale))
    throw EstimationError("sample covariance is numerically singular");
}

CVector ScmEstimate::whiten(const CVector& x) const {
  return factor_.triangularView<Eigen::Lower>().solve(x);
}

CMatrix ScmEstimate::whiten(const CMatrix& x) const {
  return factor_.triangularView<Eigen::Lower>().solve(x);
}

ScmEstimate sample_covariance(const TrainingSet& training) { return ScmEstimate(training); }

Complex ml_amplitude(const CVector& z, const ScmEstimate& scm, const CVector& v) {
  const CVector vw = scm.whiten(v);
  return vw.dot(scm.whiten(z)) / vw.squaredNorm();
}

std::vector<double> default_q_grid() {
  std::vector<double> grid{0.01};
  for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

void SlimConfig::validate(int n_bins) const {
  if (q_grid.empty()) throw DomainError("q grid is empty");
  for (double q : q_grid)
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("q values must lie in (0, 1]");
  if (n_iterations < 1) throw DomainError("at least one iteration is required");
  const int h = resolved_h_max(n_bins);
  if (h < 1 || h > n_bins) throw DomainError("h_max must lie in 1..M");
  if (relative_tolerance && !(*relative_tolerance > 0.0))
    throw DomainError("relative tolerance must be positive");
}

int SparseEstimate::support_size() const {
  return static_cast<int>((alpha.array() != Complex(0.0)).count());
}

namespace {

// Compared in squared magnitude to avoid a hypot per entry.
void apply_zero_floor(CVector& alpha) {
  double peak2 = 0.0;
  for (Eigen::Index l = 0; l < alpha.size(); ++l) peak2 = std::max(peak2, std::norm(alpha(l)));
  const double floor2 = kZeroFloor * kZeroFloor * peak2;
  for (Eigen::Index l = 0; l < alpha.size(); ++l)
    if (std::norm(alpha(l)) < floor2) alpha(l) = 0.0;
}

// In-place lower Cholesky of a small Hermitian matrix (lower triangle read),
// then g^{-1} b into x. Eigen's blocked LLT costs more than the arithmetic at
// the sizes the iteration sees.
void cholesky_solve(CMatrix& g, const CVector& b, CVector& x) {
  const Eigen::Index n = g.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = g(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) d -= std::norm(g(j, k));
    if (!(d > 0.0)) throw NumericError("SLIM update matrix is not positive definite");
    const double pivot = std::sqrt(d);
    g(j, j) = pivot;
    const double inv = 1.0 / pivot;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Complex s = g(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= g(i, k) * std::conj(g(j, k));
      g(i, j) = s * inv;
    }
  }
  x = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex s = x(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= g(i, k) * x(k);
    x(i) = s / g(i, i).real();
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Complex s = x(i);
    for (Eigen::Index k = i + 1; k < n; ++k) s -= std::conj(g(k, i)) * x(k);
    x(i) = s / g(i, i).real();
  }
}

// Per-(z, R_hat, V) state shared by the iteration, the BIC scan and the q sweep.
class SlimProblem {
 public:
  SlimProblem(const CVector& z, const Dictionary& dict, const ScmEstimate& scm)
      : z_(z), dict_(dict), scm_(scm) {
    if (z.size() != dict.n_elements() || scm.size() != dict.n_elements())
      throw DomainError("snapshot, dictionary and covariance sizes differ");
    const auto n = dict.n_elements();
    const auto m = dict.n_bins();
    p_.resize(m);
    vr_ = dict.matrix().real();
    vi_ = dict.matrix().imag();
    tr_.resize(n);
    ti_.resize(n);
    yr_.resize(n);
    yi_.resize(n);
    g_.resize(n, n);
  }

  const CVector& whitened_snapshot() {
    if (zw_.size() == 0) zw_ = scm_.whiten(z_);
    return zw_;
  }

  const CMatrix& whitened_dictionary() {
    if (w_.size() == 0) w_ = scm_.whiten(dict_.matrix());
    return w_;
  }

  CVector initial() {
    const CMatrix& w = whitened_dictionary();
    const CVector& zw = whitened_snapshot();
    CVector alpha = w.adjoint() * zw;
    for (Eigen::Index l = 0; l < alpha.size(); ++l) alpha(l) /= w.col(l).squaredNorm();
    apply_zero_floor(alpha);
    return alpha;
  }

  // Push-through form of the frozen-P normal equations. Because every column
  // is a ULA steering vector, V P V^H is Hermitian Toeplitz with first column
  // t = V p, so it costs one N x M product instead of N^2 M. Both products
  // with V run on its real and imaginary parts since p is real.
  void step(CVector& alpha, double q) {
    const auto n = dict_.n_elements();
    const double half_exponent = 1.0 - 0.5 * q;

    // Hand-rolled column loops: Eigen's GEMV dispatch dominates at N x M this small.
    const double* vr = vr_.data();
    const double* vi = vi_.data();
    bool any = false;
    std::fill(tr_.begin(), tr_.end(), 0.0);
    std::fill(ti_.begin(), ti_.end(), 0.0);
    for (Eigen::Index l = 0; l < alpha.size(); ++l) {
      const double mag2 = std::norm(alpha(l));
      if (mag2 == 0.0) {
        p_(l) = 0.0;
        continue;
      }
      const double p = std::pow(mag2, half_exponent);
      p_(l) = p;
      any = true;
      const double* cr = vr + l * n;
      const double* ci = vi + l * n;
      for (Eigen::Index i = 0; i < n; ++i) {
        tr_[i] += cr[i] * p;
        ti_[i] += ci[i] * p;
      }
    }
    if (!any) return;

    const CMatrix& r = scm_.matrix();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j; i < n; ++i) g_(i, j) = r(i, j) + Complex(tr_[i - j], ti_[i - j]);
    cholesky_solve(g_, z_, y_);

    for (Eigen::Index i = 0; i < n; ++i) {
      yr_[i] = y_(i).real();
      yi_[i] = y_(i).imag();
    }
    for (Eigen::Index l = 0; l < alpha.size(); ++l) {
      if (p_(l) == 0.0) {
        alpha(l) = 0.0;
        continue;
      }
      const double* cr = vr + l * n;
      const double* ci = vi + l * n;
      double re = 0.0;
      double im = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        re += cr[i] * yr_[i] + ci[i] * yi_[i];
        im += cr[i] * yi_[i] - ci[i] * yr_[i];
      }
      alpha(l) = p_(l) * Complex(re, im);
    }
    apply_zero_floor(alpha);
  }

  BicSelection select(const CVector& alpha_full, int h_max) {
    const CMatrix& w = whitened_dictionary();
    const CVector& zw = whitened_snapshot();

    order_.clear();
    for (Eigen::Index l = 0; l < alpha_full.size(); ++l)
      if (alpha_full(l) != Complex(0.0)) order_.push_back(l);
    std::stable_sort(order_.begin(), order_.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::norm(alpha_full(a)) > std::norm(alpha_full(b));
    });

    BicSelection out;
    out.alpha = CVector::Zero(alpha_full.size());
    residual_ = zw;
    const int limit = std::min<int>(h_max, static_cast<int>(order_.size()));
    if (limit == 0) {
      out.bic = 2.0 * residual_.squaredNorm();
      return out;
    }
    const double penalty = 3.0 * std::log(2.0 * dict_.n_elements());
    for (int h = 1; h <= limit; ++h) {
      const Eigen::Index l = order_[static_cast<std::size_t>(h - 1)];
      residual_ -= alpha_full(l) * w.col(l);
      const double bic = 2.0 * residual_.squaredNorm() + penalty * h;
      if (h == 1 || bic < out.bic) {
        out.bic = bic;
        out.order = h;
      }
    }
    for (int h = 0; h < out.order; ++h) {
      const Eigen::Index l = order_[static_cast<std::size_t>(h)];
      out.alpha(l) = alpha_full(l);
    }
    return out;
  }

 private:
  const CVector& z_;
  const Dictionary& dict_;
  const ScmEstimate& scm_;
  CVector zw_;
  CMatrix w_;
  RVector p_;
  RMatrix vr_;
  RMatrix vi_;
  std::vector<double> tr_, ti_, yr_, yi_;
  CMatrix g_;
  CVector y_;
  CVector residual_;
  std::vector<Eigen::Index> order_;
};

void check_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0, 1]");
}

void run_iterations(SlimProblem& problem, CVector& alpha, double q, int n_iterations,
                    std::optional<double> tol) {
  for (int i = 0; i < n_iterations; ++i) {
    if (!tol) {
      problem.step(alpha, q);
      continue;
    }
    const CVector previous = alpha;
    problem.step(alpha, q);
    if ((alpha - previous).norm() <= *tol * previous.norm()) break;
  }
}

}  // namespace

CVector slim_initialize(const CVector& z, const Dictionary& dict, const ScmEstimate& scm) {
  SlimProblem problem(z, dict, scm);
  return problem.initial();
}

CVector slim_step(const CVector& alpha, const CVector& z, const Dictionary& dict,
                  const ScmEstimate& scm, double q) {
  check_q(q);
  if (alpha.size() != dict.n_bins()) throw DomainError("amplitude vector length differs from M");
  SlimProblem problem(z, dict, scm);
  CVector next = alpha;
  problem.step(next, q);
  return next;
}

CVector slim_iterate(const CVector& z, const Dictionary& dict, const ScmEstimate& scm, double q,
                     int n_iterations, std::optional<double> relative_tolerance) {
  check_q(q);
  if (n_iterations < 1) throw DomainError("at least one iteration is required");
  SlimProblem problem(z, dict, scm);
  CVector alpha = problem.initial();
  run_iterations(problem, alpha, q, n_iterations, relative_tolerance);
  return alpha;
}

double slim_objective(const CVector& alpha, const CVector& z, const Dictionary& dict,
                      const ScmEstimate& scm, double q) {
  check_q(q);
  const CVector residual = scm.whiten(CVector(z - dict.matrix() * alpha));
  double prior = 0.0;
  for (Eigen::Index l = 0; l < alpha.size(); ++l)
    prior += (2.0 / q) * (std::pow(std::abs(alpha(l)), q) - 1.0);
  return residual.squaredNorm() + prior;
}

CVector truncate_to_largest(const CVector& alpha, int h) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(alpha.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::norm(alpha(a)) > std::norm(alpha(b));
  });
  CVector out = CVector::Zero(alpha.size());
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(h, 0)), order.size());
  for (std::size_t i = 0; i < keep; ++i) out(order[i]) = alpha(order[i]);
  return out;
}

double bic_value(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                 const CVector& alpha_trunc, int h, int h_max) {
  const int limit = h_max == 0 ? dict.n_bins() : h_max;
  if (h < 1 || h > limit) throw DomainError("model order outside 1..h_max");
  const CVector residual = scm.whiten(CVector(z - dict.matrix() * alpha_trunc));
  return 2.0 * residual.squaredNorm() + 3.0 * h * std::log(2.0 * dict.n_elements());
}

BicSelection bic_select(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                        const CVector& alpha_full, int h_max) {
  if (h_max < 1) throw DomainError("h_max must be at least 1");
  if (alpha_full.size() != dict.n_bins()) throw DomainError("amplitude vector length differs from M");
  SlimProblem problem(z, dict, scm);
  return problem.select(alpha_full, std::min(h_max, dict.n_bins()));
}

SparseEstimate bslim(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                     const SlimConfig& config) {
  config.validate(dict.n_bins());
  const int h_max = config.resolved_h_max(dict.n_bins());

  SlimProblem problem(z, dict, scm);
  const CVector start = problem.initial();

  SparseEstimate best;
  bool have_best = false;
  CVector alpha;
  for (double q : config.q_grid) {
    alpha = start;
    run_iterations(problem, alpha, q, config.n_iterations, config.relative_tolerance);
    BicSelection sel = problem.select(alpha, h_max);
    const bool better = !have_best || sel.bic < best.bic_value ||
                        (sel.bic == best.bic_value && q < best.selected_q);
    if (better) {
      best.alpha = std::move(sel.alpha);
      best.selected_order = sel.order;
      best.selected_q = q;
      best.bic_value = sel.bic;
      have_best = true;
    }
  }
  return best;
}

}  // namespace sparsedet
