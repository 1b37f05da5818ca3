#pragma once

#include <array>
#include <span>
#include <vector>

#include "lumibal/types.hpp"

namespace lumibal::modality {

struct ModalityConfig {
  int sw = 4;          // smoothing half-window, in bins
  double rt = 0.5;     // minimum peak height relative to the smoothed maximum
  // Minimum topographic prominence relative to the smoothed maximum.
  // 0 keeps every local maximum that clears `rt`.
  double prominence = 0.1;

  // Throws Error(kConfig) unless sw >= 1, 0 < rt <= 1, 0 <= prominence <= 1.
  void validate() const;
};

struct PeakSet {
  std::array<double, kLevels> smoothed{};
  std::vector<int> peaks;  // ascending bin indices
  double threshold_used = 0.0;
};

// Centered moving average over [i - sw, i + sw], truncated at the edges.
std::array<double, kLevels> smooth(const BrightnessDistribution& dist, int sw);

// A peak is a maximal run of equal values whose neighbours are strictly lower
// (missing neighbours at the ends count as lower), with height >= rt * max and
// prominence >= prominence * max. Plateaus report their (left-)center bin.
// Throws Error(kDegenerate) when the input has no positive value.
PeakSet detect_peaks(std::span<const double, kLevels> smoothed, double rt,
                     double prominence = 0.0);

PeakSet analyze(const BrightnessDistribution& dist, const ModalityConfig& cfg);
Modality classify(const BrightnessDistribution& dist, const ModalityConfig& cfg);

PairType pair_type(Modality m1, Modality m2);

// Non-Uni pair types: every image is Bi or Multi.
bool is_non_uni(PairType t);

}  // namespace lumibal::modality
