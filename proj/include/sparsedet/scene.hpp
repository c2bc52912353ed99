// SPDX-License-Identifier: Apache-2.0
//
// Array geometry, angular grids and dictionaries, interference covariance
// models and synthetic snapshot generation for a uniform linear array.
#pragma once

#include <cstdint>
#include <vector>

#include "sparsedet/linalg.hpp"
#include "sparsedet/rng.hpp"

namespace sparsedet {

class ArrayGeometry {
 public:
  explicit ArrayGeometry(int n_elements, double spacing_ratio = 0.5);

  int n_elements() const { return n_elements_; }
  /// Interelement spacing in wavelengths (d / lambda).
  double spacing_ratio() const { return spacing_ratio_; }

 private:
  int n_elements_;
  double spacing_ratio_;
};

/// M azimuth bins, Delta-theta apart, centred on the pointing direction.
/// M is odd so the pointing direction is on the grid; bins are 0-based and
/// the pointing bin is (M - 1) / 2.
class AngularGrid {
 public:
  AngularGrid(double pointing_deg, double delta_deg, int n_bins);

  /// Largest symmetric grid whose outermost bins stay within
  /// pointing ± half_span_deg.
  static AngularGrid spanning(double pointing_deg, double delta_deg, double half_span_deg);

  double pointing_deg() const { return pointing_deg_; }
  double delta_deg() const { return delta_deg_; }
  int n_bins() const { return static_cast<int>(angles_deg_.size()); }
  int nominal_index() const { return (n_bins() - 1) / 2; }
  const std::vector<double>& angles_deg() const { return angles_deg_; }

 private:
  double pointing_deg_;
  double delta_deg_;
  std::vector<double> angles_deg_;
};

/// v(theta)_i = exp(j i 2 pi (d/lambda) sin(theta)), i = 0..N-1.
CVector steering_vector(const ArrayGeometry& geometry, double angle_deg);

class Dictionary {
 public:
  Dictionary(ArrayGeometry geometry, AngularGrid grid);

  const CMatrix& matrix() const { return matrix_; }
  const AngularGrid& grid() const { return grid_; }
  const ArrayGeometry& geometry() const { return geometry_; }
  int nominal_index() const { return grid_.nominal_index(); }
  int n_elements() const { return static_cast<int>(matrix_.rows()); }
  int n_bins() const { return static_cast<int>(matrix_.cols()); }
  auto column(int l) const { return matrix_.col(l); }

 private:
  ArrayGeometry geometry_;
  AngularGrid grid_;
  CMatrix matrix_;
};

Dictionary build_dictionary(const ArrayGeometry& geometry, const AngularGrid& grid);

/// Hermitian positive-definite interference covariance with its cached
/// lower Cholesky factor (covariance = L L^H).
class InterferenceModel {
 public:
  explicit InterferenceModel(CMatrix covariance);

  const CMatrix& covariance() const { return covariance_; }
  const CMatrix& factor() const { return factor_; }
  int size() const { return static_cast<int>(covariance_.rows()); }

  /// L^{-1} x, so that x^H R^{-1} y = whiten(x)^H whiten(y).
  CVector whiten(const CVector& x) const;
  CMatrix whiten(const CMatrix& x) const;
  /// R^{-1} x through the factor.
  CMatrix solve(const CMatrix& x) const;

 private:
  CMatrix covariance_;
  CMatrix factor_;
};

/// Exponentially correlated interference, entry (i, j) = rho^|i - j|.
InterferenceModel exp_covariance(int n, double rho);

struct TargetScenario {
  double sinr_db = 0.0;
  double true_angle_deg = 0.0;
  double phase_rad = 0.0;
};

/// Complex amplitude alpha with |alpha|^2 v^H R^{-1} v = 10^(SINR/10) and
/// arg(alpha) = phase.
Complex amplitude_for_sinr(const TargetScenario& scenario, const InterferenceModel& model,
                           const ArrayGeometry& geometry);

struct Snapshot {
  CVector z;
};

/// K signal-free secondary vectors stored as the columns of an N x K matrix.
struct TrainingSet {
  CMatrix samples;
  int size() const { return static_cast<int>(samples.cols()); }
};

enum class Hypothesis { H0, H1 };

struct Trial {
  Snapshot snapshot;
  TrainingSet training;
};

/// Draws one cell under test plus k training vectors. Noise is factor * w with
/// w standard circular Gaussian; under H1 the snapshot gets alpha v(theta_t)
/// at the exact (possibly off-grid) target angle.
Trial synthesize_trial(Hypothesis hypothesis, const TargetScenario& scenario,
                       const InterferenceModel& model, const ArrayGeometry& geometry, int k,
                       RngStream& rng);

/// Same as above with the target term precomputed (alpha v(theta_t)).
Trial synthesize_trial(Hypothesis hypothesis, const CVector& target_signal,
                       const InterferenceModel& model, int k, RngStream& rng);

/// Largest normalized whitened inner product between distinct columns.
double dictionary_coherence(const Dictionary& dict, const InterferenceModel& model);

/// Largest normalized whitened inner product between column bin_index
/// (0-based) and every other column.
double bin_coherence(const Dictionary& dict, const InterferenceModel& model, int bin_index);

}  // namespace sparsedet
