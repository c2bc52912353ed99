// SPDX-License-Identifier: Apache-2.0
#include "sparsedet/scene.hpp"

#include <cmath>
#include <string>

#include "sparsedet/errors.hpp"

namespace sparsedet {

ArrayGeometry::ArrayGeometry(int n_elements, double spacing_ratio)
    : n_elements_(n_elements), spacing_ratio_(spacing_ratio) {
  if (n_elements < 2) throw DomainError("array needs at least 2 elements");
  if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
    throw DomainError("spacing ratio must be positive");
}

AngularGrid::AngularGrid(double pointing_deg, double delta_deg, int n_bins)
    : pointing_deg_(pointing_deg), delta_deg_(delta_deg) {
  if (!(delta_deg > 0.0) || !std::isfinite(delta_deg))
    throw DomainError("grid spacing must be positive");
  if (n_bins < 1 || n_bins % 2 == 0) throw DomainError("grid needs an odd, positive bin count");
  const int half = (n_bins - 1) / 2;
  angles_deg_.reserve(static_cast<std::size_t>(n_bins));
  for (int l = 0; l < n_bins; ++l) {
    const double angle = pointing_deg + static_cast<double>(l - half) * delta_deg;
    if (!(std::abs(angle) < 90.0))
      throw DomainError("grid angle " + std::to_string(angle) + " deg is outside (-90, 90)");
    angles_deg_.push_back(angle);
  }
}

AngularGrid AngularGrid::spanning(double pointing_deg, double delta_deg, double half_span_deg) {
  if (!(delta_deg > 0.0)) throw DomainError("grid spacing must be positive");
  if (!(half_span_deg >= 0.0)) throw DomainError("grid half span must be non-negative");
  const int half = static_cast<int>(std::floor(half_span_deg / delta_deg + 1e-9));
  return AngularGrid(pointing_deg, delta_deg, 2 * half + 1);
}

CVector steering_vector(const ArrayGeometry& geometry, double angle_deg) {
  if (!(std::abs(angle_deg) < 90.0))
    throw DomainError("steering angle must lie strictly inside (-90, 90) deg");
  const double phase = 2.0 * kPi * geometry.spacing_ratio() * std::sin(deg_to_rad(angle_deg));
  CVector v(geometry.n_elements());
  for (int i = 0; i < geometry.n_elements(); ++i) v(i) = std::polar(1.0, phase * i);
  return v;
}

Dictionary::Dictionary(ArrayGeometry geometry, AngularGrid grid)
    : geometry_(geometry), grid_(std::move(grid)) {
  matrix_.resize(geometry_.n_elements(), grid_.n_bins());
  for (int l = 0; l < grid_.n_bins(); ++l)
    matrix_.col(l) = steering_vector(geometry_, grid_.angles_deg()[static_cast<std::size_t>(l)]);
}

Dictionary build_dictionary(const ArrayGeometry& geometry, const AngularGrid& grid) {
  return Dictionary(geometry, grid);
}

InterferenceModel::InterferenceModel(CMatrix covariance) : covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0)
    throw DomainError("covariance must be a non-empty square matrix");
  const double scale = covariance_.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) throw NumericError("covariance is zero or not finite");
  const double asym = (covariance_ - covariance_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw DomainError("covariance is not Hermitian");

  Eigen::LLT<CMatrix> llt(covariance_);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  factor_ = llt.matrixL();
  const double min_pivot = factor_.diagonal().real().minCoeff();
  if (!(min_pivot * min_pivot > 1e-14 * scale)) throw NumericError("covariance is numerically singular");
}

CVector InterferenceModel::whiten(const CVector& x) const {
  return factor_.triangularView<Eigen::Lower>().solve(x);
}

CMatrix InterferenceModel::whiten(const CMatrix& x) const {
  return factor_.triangularView<Eigen::Lower>().solve(x);
}

CMatrix InterferenceModel::solve(const CMatrix& x) const {
  CMatrix y = factor_.triangularView<Eigen::Lower>().solve(x);
  return factor_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

InterferenceModel exp_covariance(int n, double rho) {
  if (n < 1) throw DomainError("covariance size must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("one-lag correlation must lie in [0, 1)");
  CMatrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
  return InterferenceModel(std::move(r));
}

Complex amplitude_for_sinr(const TargetScenario& scenario, const InterferenceModel& model,
                           const ArrayGeometry& geometry) {
  const CVector vw = model.whiten(steering_vector(geometry, scenario.true_angle_deg));
  const double gain = vw.squaredNorm();
  if (!(gain > 0.0) || !std::isfinite(gain)) throw NumericError("degenerate whitened steering vector");
  const double power = std::pow(10.0, scenario.sinr_db / 10.0);
  return std::polar(std::sqrt(power / gain), scenario.phase_rad);
}

Trial synthesize_trial(Hypothesis hypothesis, const CVector& target_signal,
                       const InterferenceModel& model, int k, RngStream& rng) {
  const int n = model.size();
  if (k < n) throw DomainError("training size must be at least the array size");
  const auto lower = model.factor().triangularView<Eigen::Lower>();

  Trial trial;
  const CMatrix w = rng.circular_normal_matrix(n, k + 1);
  trial.snapshot.z = lower * w.col(0);
  if (hypothesis == Hypothesis::H1) trial.snapshot.z += target_signal;
  trial.training.samples = lower * w.rightCols(k);
  return trial;
}

Trial synthesize_trial(Hypothesis hypothesis, const TargetScenario& scenario,
                       const InterferenceModel& model, const ArrayGeometry& geometry, int k,
                       RngStream& rng) {
  CVector signal = CVector::Zero(geometry.n_elements());
  if (hypothesis == Hypothesis::H1)
    signal = amplitude_for_sinr(scenario, model, geometry) *
             steering_vector(geometry, scenario.true_angle_deg);
  return synthesize_trial(hypothesis, signal, model, k, rng);
}

namespace {

// Normalized |v_i^H R^{-1} v_j| for all column pairs.
RMatrix normalized_whitened_gram(const Dictionary& dict, const InterferenceModel& model) {
  if (dict.n_elements() != model.size()) throw DomainError("dictionary and covariance sizes differ");
  const CMatrix cross = dict.matrix().adjoint() * model.solve(dict.matrix());
  const RVector norms = cross.diagonal().real().cwiseSqrt();
  RMatrix out = cross.cwiseAbs();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) /= norms(i) * norms(j);
  return out;
}

}  // namespace

double dictionary_coherence(const Dictionary& dict, const InterferenceModel& model) {
  if (dict.n_bins() < 2) throw DomainError("coherence needs at least two columns");
  const RMatrix g = normalized_whitened_gram(dict, model);
  double mu = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j) mu = std::max(mu, g(i, j));
  return std::min(mu, 1.0);
}

double bin_coherence(const Dictionary& dict, const InterferenceModel& model, int bin_index) {
  if (dict.n_bins() < 2) throw DomainError("coherence needs at least two columns");
  if (bin_index < 0 || bin_index >= dict.n_bins()) throw DomainError("bin index out of range");
  const RMatrix g = normalized_whitened_gram(dict, model);
  double mu = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    if (i != bin_index) mu = std::max(mu, g(i, bin_index));
  return std::min(mu, 1.0);
}

}  // namespace sparsedet
