// SPDX-License-Identifier: Apache-2.0
//
// Adaptive decision statistics over a cell under test, an SCM and the nominal
// steering vector, and the sparse-amplitude composite rules built on them.
#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "sparsedet/linalg.hpp"
#include "sparsedet/sparse.hpp"

namespace sparsedet {

enum class DetectorId { Kelly, Amf, Rao, WAbort, Ace, Sad, SadGlrt, SadAmf, BslimAmf, BslimGlrt };

inline constexpr std::array<DetectorId, 10> kAllDetectors = {
    DetectorId::Kelly,  DetectorId::Amf,     DetectorId::Rao,      DetectorId::WAbort,
    DetectorId::Ace,    DetectorId::Sad,     DetectorId::SadGlrt,  DetectorId::SadAmf,
    DetectorId::BslimAmf, DetectorId::BslimGlrt};

/// Lower-case CLI name ("kelly", "sad-glrt", ...).
std::string_view detector_name(DetectorId id);
std::optional<DetectorId> parse_detector(std::string_view name);

/// True when the rule consumes the sparse amplitude estimate.
bool uses_sparse_estimate(DetectorId id);
/// SAD-GLRT and BSLIM-GLRT run at Kelly's threshold; SAD-AMF and BSLIM-AMF at
/// the AMF's. Classical detectors are their own companions; SAD has none.
std::optional<DetectorId> threshold_companion(DetectorId id);

struct DetectorOutcome {
  DetectorId id;
  std::optional<double> statistic;  // empty for SAD
  bool decision = false;            // true = H1
};

/// The three quadratic forms every statistic is built from:
/// cross = v^H R^{-1} z, steer = v^H R^{-1} v, snapshot = z^H R^{-1} z.
struct AdaptiveForms {
  Complex cross;
  double steer = 0.0;
  double snapshot = 0.0;
  int k = 0;
};

/// Whitened snapshot and steering vector plus their forms; computed once per
/// trial and shared by every detector.
struct WhitenedCell {
  CVector zw;
  CVector vw;
  AdaptiveForms forms;
};

WhitenedCell whiten_cell(const CVector& z, const ScmEstimate& scm, const CVector& v);

double amf_statistic(const AdaptiveForms& f);
double kelly_statistic(const AdaptiveForms& f);
double rao_statistic(const AdaptiveForms& f);
double wabort_statistic(const AdaptiveForms& f);
double ace_statistic(const AdaptiveForms& f);
/// -(z - a v)^H R^{-1} (z - a v) + z^H R^{-1} z, as a difference of norms.
double bslim_amf_statistic(const WhitenedCell& cell, Complex alpha_m);
double bslim_glrt_statistic(const WhitenedCell& cell, Complex alpha_m);

double kelly_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v, int k);
double amf_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v);
/// id must be Rao, WAbort or Ace.
double selective_statistic(DetectorId id, const CVector& z, const ScmEstimate& scm,
                           const CVector& v, int k);
double bslim_amf_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v_m,
                           Complex alpha_m);
double bslim_glrt_statistic(const CVector& z, const ScmEstimate& scm, const CVector& v_m,
                            Complex alpha_m, int k);

/// H1 iff the recovered amplitude at the nominal bin is exactly nonzero.
bool sad_gate(const SparseEstimate& estimate, int nominal_index);
/// gate AND (statistic > threshold).
bool two_stage_decision(bool gate, double statistic, double threshold);

/// Value of the statistic a detector thresholds. SAD has no statistic; composite
/// SAD rules report their classical stage. estimate is required when
/// uses_sparse_estimate(id).
std::optional<double> detector_statistic(DetectorId id, const WhitenedCell& cell,
                                         const SparseEstimate* estimate, int nominal_index);

DetectorOutcome evaluate_detector(DetectorId id, const WhitenedCell& cell,
                                  const SparseEstimate* estimate, int nominal_index,
                                  double threshold);

}  // namespace sparsedet
