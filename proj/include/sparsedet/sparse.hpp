// SPDX-License-Identifier: Apache-2.0
//
// Sample covariance estimation and sparse amplitude recovery over an angular
// dictionary: the SLIM fixed-point iteration under an l_q-type prior, BIC
// model-order truncation and the parameter-free sweep over q.
#pragma once

#include <optional>
#include <vector>

#include "sparsedet/linalg.hpp"
#include "sparsedet/scene.hpp"

namespace sparsedet {

/// R_hat = (1/K) sum_k z_k z_k^H with its cached lower Cholesky factor.
class ScmEstimate {
 public:
  explicit ScmEstimate(const TrainingSet& training);
  /// Wraps a known Hermitian PD matrix as if it were estimated from k samples.
  static ScmEstimate from_matrix(CMatrix matrix, int k);

  const CMatrix& matrix() const { return matrix_; }
  const CMatrix& factor() const { return factor_; }
  int k() const { return k_; }
  int size() const { return static_cast<int>(matrix_.rows()); }

  /// L^{-1} x; x^H R_hat^{-1} y = whiten(x)^H whiten(y).
  CVector whiten(const CVector& x) const;
  CMatrix whiten(const CMatrix& x) const;
  /// x^H R_hat^{-1} x.
  double quadratic(const CVector& x) const { return whiten(x).squaredNorm(); }

 private:
  ScmEstimate(CMatrix matrix, int k, bool);
  void factorize();

  CMatrix matrix_;
  CMatrix factor_;
  int k_ = 0;
};

ScmEstimate sample_covariance(const TrainingSet& training);

/// Unconstrained ML amplitude v^H R^{-1} z / v^H R^{-1} v.
Complex ml_amplitude(const CVector& z, const ScmEstimate& scm, const CVector& v);

/// {0.01, 0.1, 0.2, ..., 1.0}
std::vector<double> default_q_grid();

struct SlimConfig {
  std::vector<double> q_grid = default_q_grid();
  int n_iterations = 15;
  /// Largest model order tried by BIC; 0 means every bin (h_max = M).
  int h_max = 0;
  /// Optional stop once ||a_new - a|| <= tol ||a||. Off when empty.
  std::optional<double> relative_tolerance;

  int resolved_h_max(int n_bins) const { return h_max == 0 ? n_bins : h_max; }
  void validate(int n_bins) const;
};

/// Entries below kZeroFloor * max|alpha| are snapped to exact zero each
/// iteration, which keeps them at zero from then on.
inline constexpr double kZeroFloor = 1e-12;

struct SparseEstimate {
  CVector alpha;
  int selected_order = 0;
  double selected_q = 0.0;
  double bic_value = 0.0;

  int support_size() const;
};

/// Per-bin ML amplitudes, the starting point of the iteration.
CVector slim_initialize(const CVector& z, const Dictionary& dict, const ScmEstimate& scm);

/// One fixed-point update alpha <- P V^H (V P V^H + R)^{-1} z with
/// P = diag(|alpha_l|^(2-q)), followed by the zero floor.
CVector slim_step(const CVector& alpha, const CVector& z, const Dictionary& dict,
                  const ScmEstimate& scm, double q);

/// Initialization followed by exactly n_iterations updates (fewer only when
/// relative_tolerance is given and met).
CVector slim_iterate(const CVector& z, const Dictionary& dict, const ScmEstimate& scm, double q,
                     int n_iterations, std::optional<double> relative_tolerance = std::nullopt);

/// ||R^{-1/2}(z - V alpha)||^2 + sum_l (2/q)(|alpha_l|^q - 1).
double slim_objective(const CVector& alpha, const CVector& z, const Dictionary& dict,
                      const ScmEstimate& scm, double q);

/// Keeps the h largest-magnitude entries (ties to the lower index).
CVector truncate_to_largest(const CVector& alpha, int h);

/// 2 ||R^{-1/2}(z - V alpha_h)||^2 + 3 h ln(2N). h must lie in 1..h_max.
double bic_value(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                 const CVector& alpha_trunc, int h, int h_max = 0);

struct BicSelection {
  CVector alpha;
  double bic = 0.0;
  int order = 0;
};

/// Minimizes the BIC over h = 1..h_max on truncations of alpha_full (ties to
/// smaller h). Orders beyond the support of alpha_full repeat the full-support
/// residual with a larger penalty and never win, so they are skipped. An
/// all-zero alpha_full yields order 0 and the bare residual term.
BicSelection bic_select(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                        const CVector& alpha_full, int h_max);

/// Runs the iteration and BIC selection for every q in the grid and keeps the
/// lowest BIC (ties to smaller q).
SparseEstimate bslim(const CVector& z, const Dictionary& dict, const ScmEstimate& scm,
                     const SlimConfig& config);

}  // namespace sparsedet
