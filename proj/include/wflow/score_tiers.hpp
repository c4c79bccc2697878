#pragma once

// Partial-credit tier tables for the composite scorers, kept in one place.
// The mid-band values (slicing CQI +/-2 -> 0.5, bandwidth <5% -> 0.9 and
// <10% -> 0.8, assurance CQI +/-1 -> 0.85 and +/-2 -> 0.7) are reconstructed
// interpolations between the published endpoints.
namespace wflow::bench::tiers {

// relative-error tiers shared by bandwidth and throughput
inline constexpr double kRelErrBound[] = {0.02, 0.05, 0.10, 0.20};
inline constexpr double kRelErrScore[] = {1.0, 0.9, 0.8, 0.7};  // else 0.0

// slicing CQI distance tiers: exact, +/-1, +/-2, +/-3..4, else 0
inline constexpr double kSlicingCqiScore[] = {1.0, 0.8, 0.5, 0.2, 0.2};

// assurance CQI distance tiers: exact, +/-1, +/-2, +/-3, else 0
inline constexpr double kAssuranceCqiScore[] = {1.0, 0.85, 0.7, 0.5};

// knowledge numeric tiers: <1%, <5%, <10%, then the factor detectors
inline constexpr double kKnowledgeRelErrBound[] = {0.01, 0.05, 0.10};
inline constexpr double kKnowledgeRelErrScore[] = {1.0, 0.9, 0.7};
inline constexpr double kUnitFactorScore = 0.5;  // off by 1e3 or 1e6
inline constexpr double kDoubleFactorScore = 0.3;

// composite weights
inline constexpr double kSlicingWeights[] = {0.25, 0.15, 0.35, 0.25};  // slice, cqi, bw, tp
inline constexpr double kAssuranceWeights[] = {0.15, 0.15, 0.20,
                                               0.25, 0.20, 0.05};  // pos, cqi, slice, bw, tp, qos

// assurance position decay: max(0, 1 - (d / kPositionZero)^kPositionExponent)
inline constexpr double kPositionZeroMeters = 20.0;
inline constexpr double kPositionExponent = 1.2;

}  // namespace wflow::bench::tiers
