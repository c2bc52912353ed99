// SPDX-License-Identifier: Apache-2.0
#include "sparsedet/detectors.hpp"

#include <cmath>

#include "sparsedet/errors.hpp"

namespace sparsedet {

namespace {

struct NamedDetector {
  DetectorId id;
  std::string_view name;
};

constexpr std::array<NamedDetector, 10> kNames = {{
    {DetectorId::Kelly, "kelly"},
    {DetectorId::Amf, "amf"},
    {DetectorId::Rao, "rao"},
    {DetectorId::WAbort, "wabort"},
    {DetectorId::Ace, "ace"},
    {DetectorId::Sad, "sad"},
    {DetectorId::SadGlrt, "sad-glrt"},
    {DetectorId::SadAmf, "sad-amf"},
    {DetectorId::BslimAmf, "bslim-amf"},
    {DetectorId::BslimGlrt, "bslim-glrt"},
}};

}  // namespace

std::string_view detector_name(DetectorId id) {
  for (const auto& entry : kNames)
    if (entry.id == id) return entry.name;
  return "unknown";
}

std::optional<DetectorId> parse_detector(std::string_view name) {
  for (const auto& entry : kNames)
    if (entry.name == name) return entry.id;
  if (name == "glrt") return DetectorId::Kelly;
  if (name == "w-abort") return DetectorId::WAbort;
  return std::nullopt;
}

bool uses_sparse_estimate(DetectorId id) {
  switch (id) {
    case DetectorId::Sad:
    case DetectorId::SadGlrt:
    case DetectorId::SadAmf:
    case DetectorId::BslimAmf:
    case DetectorId::BslimGlrt:
      return true;
    default:
      return false;
  }
}

std::optional<DetectorId> threshold_companion(DetectorId id) {
  switch (id) {
    case DetectorId::Sad:
      return std::nullopt;
    case DetectorId::SadGlrt:
    case DetectorId::BslimGlrt:
      return DetectorId::Kelly;
    case DetectorId::SadAmf:
    case DetectorId::BslimAmf:
      return DetectorId::Amf;
    default:
      return id;
  }
}

WhitenedCell whiten_cell(const CVector& z, const ScmEstimate& scm, const CVector& v) {
  if (z.size() != scm.size() || v.size() != scm.size())
    throw DomainError("snapshot, steering vector and covariance sizes differ");
  WhitenedCell cell;
  cell.zw = scm.whiten(z);
  cell.vw = scm.whiten(v);
  cell.forms.cross = cell.vw.dot(cell.zw);
  cell.forms.steer = cell.vw.squaredNorm();
  cell.forms.snapshot = cell.zw.squaredNorm();
  cell.forms.k = scm.k();
  return cell;
}

double amf_statistic(const AdaptiveForms& f) { return std::norm(f.cross) / f.steer; }

double kelly_statistic(const AdaptiveForms& f) {
  return std::norm(f.cross) / (f.steer * (f.k + f.snapshot));
}

double rao_statistic(const AdaptiveForms& f) {
  // Sherman-Morrison on S1 = z z^H + K R_hat.
  const double a2 = std::norm(f.cross);
  const double kg = f.k + f.snapshot;
  return f.k * a2 / (kg * (f.steer * kg - a2));
}

double wabort_statistic(const AdaptiveForms& f) {
  const double one_minus = 1.0 - kelly_statistic(f);
  return 1.0 / ((f.k + f.snapshot) * one_minus * one_minus);
}

double ace_statistic(const AdaptiveForms& f) {
  if (f.snapshot == 0.0) return 0.0;
  return std::norm(f.cross) / (f.steer * f.snapshot);
}

double bslim_amf_statistic(const WhitenedCell& cell, Complex alpha_m) {
  if (alpha_m == Complex(0.0)) return 0.0;
  return cell.forms.snapshot - (cell.zw - alpha_m * cell.vw).squaredNorm();
}

double bslim_glrt_statistic(const WhitenedCell& cell, Complex alpha_m) {
  return bslim_amf_statistic(cell, alpha_m) / (cell.forms.k + cell.forms.snapshot);
}

double kelly_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v, int k) {
  AdaptiveForms f = whiten_cell(z, scm, v).forms;
  f.k = k;
  return kelly_statistic(f);
}

double amf_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v) {
  return amf_statistic(whiten_cell(z, scm, v).forms);
}

double selective_statistic(DetectorId id, const CVector& z, const ScmEstimate& scm,
                           const CVector& v, int k) {
  AdaptiveForms f = whiten_cell(z, scm, v).forms;
  f.k = k;
  switch (id) {
    case DetectorId::Rao:
      return rao_statistic(f);
    case DetectorId::WAbort:
      return wabort_statistic(f);
    case DetectorId::Ace:
      return ace_statistic(f);
    default:
      throw DomainError("selective_statistic accepts RAO, W-ABORT or ACE only");
  }
}

double bslim_amf_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v_m,
                           Complex alpha_m) {
  return bslim_amf_statistic(whiten_cell(z, scm, v_m), alpha_m);
}

double bslim_glrt_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v_m,
                            Complex alpha_m, int k) {
  WhitenedCell cell = whiten_cell(z, scm, v_m);
  cell.forms.k = k;
  return bslim_glrt_statistic(cell, alpha_m);
}

bool sad_gate(const SparseEstimate& estimate, int nominal_index) {
  if (nominal_index < 0 || nominal_index >= estimate.alpha.size())
    throw DomainError("nominal index out of range");
  return estimate.alpha(nominal_index) != Complex(0.0);
}

bool two_stage_decision(bool gate, double statistic, double threshold) {
  return gate && statistic > threshold;
}

std::optional<double> detector_statistic(DetectorId id, const WhitenedCell& cell,
                                         const SparseEstimate* estimate, int nominal_index) {
  if (uses_sparse_estimate(id) && estimate == nullptr)
    throw DomainError("detector needs a sparse amplitude estimate");
  switch (id) {
    case DetectorId::Kelly:
    case DetectorId::SadGlrt:
      return kelly_statistic(cell.forms);
    case DetectorId::Amf:
    case DetectorId::SadAmf:
      return amf_statistic(cell.forms);
    case DetectorId::Rao:
      return rao_statistic(cell.forms);
    case DetectorId::WAbort:
      return wabort_statistic(cell.forms);
    case DetectorId::Ace:
      return ace_statistic(cell.forms);
    case DetectorId::Sad:
      return std::nullopt;
    case DetectorId::BslimAmf:
      return bslim_amf_statistic(cell, estimate->alpha(nominal_index));
    case DetectorId::BslimGlrt:
      return bslim_glrt_statistic(cell, estimate->alpha(nominal_index));
  }
  return std::nullopt;
}

DetectorOutcome evaluate_detector(DetectorId id, const WhitenedCell& cell,
                                  const SparseEstimate* estimate, int nominal_index,
                                  double threshold) {
  DetectorOutcome out{id, detector_statistic(id, cell, estimate, nominal_index), false};
  switch (id) {
    case DetectorId::Sad:
      out.decision = sad_gate(*estimate, nominal_index);
      break;
    case DetectorId::SadGlrt:
    case DetectorId::SadAmf:
      out.decision = two_stage_decision(sad_gate(*estimate, nominal_index), *out.statistic, threshold);
      break;
    default:
      out.decision = *out.statistic > threshold;
      break;
  }
  return out;
}

}  // namespace sparsedet
