#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lumibal/types.hpp"

namespace lumibal::brightness {

inline constexpr int kOverexposureThreshold = 240;

// Aligned face crop in grayscale plus its face-skin mask (row-major).
struct MaskedCrop {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> gray;
  std::vector<std::uint8_t> mask;  // nonzero = face skin
};

// BT.601 luma, round half up.
std::uint8_t grayscale_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Throws Error(kEmptyRegion) when no mask bit is set, Error(kIngestion) on
// mismatched array sizes.
BrightnessDistribution histogram_from_masked(const MaskedCrop& crop);

// Median pixel value; even totals average the two middle order statistics.
HalfStep brightness_value(const BrightnessDistribution& dist);

HalfStep bvd(HalfStep bv_x, HalfStep bv_y);
// Both images of `pair` must have bv set (Error(kIntegrity) otherwise).
HalfStep bvd(const MatedPair& pair, const CohortDataset& ds);

// Share of pixels strictly brighter than `threshold`.
double overexposure_fraction(const BrightnessDistribution& dist,
                             int threshold = kOverexposureThreshold);

}  // namespace lumibal::brightness
