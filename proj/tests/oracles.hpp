// Independent reference computations for the tests: dense inverses and
// eigen-based square roots instead of the library's triangular solves.
#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <algorithm>
#include <functional>
#include <numeric>

#include "sparsedet/detectors.hpp"
#include "sparsedet/scene.hpp"
#include "sparsedet/sparse.hpp"

namespace oracle {

using namespace sparsedet;

struct Instance {
  int n = 0;
  int k = 0;
  CVector z;
  CVector v;
  CMatrix r_hat;
  ScmEstimate scm;
};

/// Random adaptive-detection instance: colored noise snapshot, K = 4N
/// training vectors, steering vector at a random angle.
inline Instance random_instance(int n, std::uint64_t seed, double signal = 0.0) {
  RngStream rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = 0.5 * u(rng.engine()) + 0.45;
  const InterferenceModel model = exp_covariance(n, rho);
  const ArrayGeometry geometry(n);
  const double angle = -60.0 + 120.0 * u(rng.engine());
  const CVector v = steering_vector(geometry, angle);
  const int k = 4 * n;
  CVector target = signal * std::polar(1.0, 2 * kPi * u(rng.engine())) * v;
  Trial t = synthesize_trial(signal > 0 ? Hypothesis::H1 : Hypothesis::H0, target, model, k, rng);
  ScmEstimate scm(t.training);
  return Instance{n, k, t.snapshot.z, v, scm.matrix(), scm};
}

inline CMatrix dense_inverse(const CMatrix& m) { return m.inverse(); }

/// R^{-1/2} through the eigendecomposition.
inline CMatrix inverse_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

inline double quad(const CVector& x, const CMatrix& inv, const CVector& y) {
  return std::real(x.dot(inv * y));
}

inline Complex cross(const CVector& x, const CMatrix& inv, const CVector& y) {
  return x.dot(inv * y);
}

/// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Literal frozen-P update: alpha_S = (V_S^H R^-1 V_S + P_S^-1)^-1 V_S^H R^-1 z on
/// the support S of alpha, zero elsewhere.
inline CVector dense_slim_step(const CVector& alpha, const CVector& z, const CMatrix& v,
                               const CMatrix& r_hat, double q) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index l = 0; l < alpha.size(); ++l)
    if (alpha(l) != Complex(0.0)) s.push_back(l);
  CVector out = CVector::Zero(alpha.size());
  if (s.empty()) return out;
  const auto m = static_cast<Eigen::Index>(s.size());
  CMatrix vs(v.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) vs.col(i) = v.col(s[static_cast<std::size_t>(i)]);
  const CMatrix rinv = r_hat.inverse();
  CMatrix a = vs.adjoint() * rinv * vs;
  for (Eigen::Index i = 0; i < m; ++i)
    a(i, i) += 1.0 / std::pow(std::abs(alpha(s[static_cast<std::size_t>(i)])), 2.0 - q);
  const CVector sol = a.partialPivLu().solve(CVector(vs.adjoint() * rinv * z));
  for (Eigen::Index i = 0; i < m; ++i) out(s[static_cast<std::size_t>(i)]) = sol(i);
  return out;
}

/// Push-through update with an explicit dense inverse.
inline CVector dense_push_through(const CVector& alpha, const CVector& z, const CMatrix& v,
                                  const CMatrix& r_hat, double q) {
  Eigen::VectorXd p(alpha.size());
  for (Eigen::Index l = 0; l < alpha.size(); ++l)
    p(l) = alpha(l) == Complex(0.0) ? 0.0 : std::pow(std::abs(alpha(l)), 2.0 - q);
  const CVector pc = p.cast<Complex>();
  const CMatrix g = v * pc.asDiagonal() * v.adjoint() + r_hat;
  return pc.asDiagonal() * CVector(v.adjoint() * g.inverse() * z);
}

struct BruteBic {
  int order = 0;
  double bic = 0.0;
  CVector alpha;
};

// Exhaustive BIC over h = 1..h_max with a separate sort and dense inverse.
inline BruteBic brute_bic(const CVector& z, const CMatrix& v, const CMatrix& r_hat,
                          const CVector& full, int h_max) {
  const auto m = full.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(full(a));
    const double mb = std::abs(full(b));
    return ma != mb ? ma > mb : a < b;
  });
  const CMatrix rinv = r_hat.inverse();
  BruteBic best;
  for (int h = 1; h <= h_max; ++h) {
    CVector trunc = CVector::Zero(m);
    for (int i = 0; i < h; ++i) trunc(idx[static_cast<std::size_t>(i)]) = full(idx[static_cast<std::size_t>(i)]);
    const CVector res = z - v * trunc;
    const double b = 2.0 * quad(res, rinv, res) + 3.0 * h * std::log(2.0 * double(v.rows()));
    if (best.order == 0 || b < best.bic) best = BruteBic{h, b, trunc};
  }
  return best;
}

inline bool close(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), abs_floor});
}

}  // namespace oracle
