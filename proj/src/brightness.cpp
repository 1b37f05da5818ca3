#include "lumibal/brightness.hpp"

#include "lumibal/error.hpp"

namespace lumibal::brightness {
namespace {

// Value of the k-th smallest pixel (0-based).
int order_statistic(const BrightnessDistribution& dist, std::uint64_t k) {
  std::uint64_t seen = 0;
  for (int v = 0; v < kLevels; ++v) {
    seen += dist.count(v);
    if (seen > k) return v;
  }
  return kLevels - 1;
}

}  // namespace

std::uint8_t grayscale_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Weights in thousandths keep the rounding exact; max is 255000 + 500.
  const unsigned y = (299u * r + 587u * g + 114u * b + 500u) / 1000u;
  return static_cast<std::uint8_t>(y > 255u ? 255u : y);
}

BrightnessDistribution histogram_from_masked(const MaskedCrop& crop) {
  const auto n = static_cast<std::size_t>(crop.width) * static_cast<std::size_t>(crop.height);
  if (crop.width <= 0 || crop.height <= 0 || crop.gray.size() != n || crop.mask.size() != n) {
    throw Error(ErrorCode::kIngestion, "crop and mask must both hold width*height pixels");
  }
  BrightnessDistribution::Counts counts{};
  for (std::size_t i = 0; i < n; ++i) {
    if (crop.mask[i] != 0) ++counts[crop.gray[i]];
  }
  bool any = false;
  for (auto c : counts) any = any || c != 0;
  if (!any) throw Error(ErrorCode::kEmptyRegion, "empty face region");
  return BrightnessDistribution(counts);
}

HalfStep brightness_value(const BrightnessDistribution& dist) {
  const std::uint64_t total = dist.total();
  const int lo = order_statistic(dist, (total - 1) / 2);
  const int hi = order_statistic(dist, total / 2);
  return HalfStep::from_halves(lo + hi);
}

HalfStep bvd(HalfStep bv_x, HalfStep bv_y) { return abs_diff(bv_x, bv_y); }

HalfStep bvd(const MatedPair& pair, const CohortDataset& ds) {
  const auto& x = ds.image_x(pair);
  const auto& y = ds.image_y(pair);
  if (!x.bv || !y.bv) {
    throw Error(ErrorCode::kIntegrity, "pair '" + pair.pair_id + "' has images without bv");
  }
  return bvd(*x.bv, *y.bv);
}

double overexposure_fraction(const BrightnessDistribution& dist, int threshold) {
  std::uint64_t above = 0;
  for (int v = threshold + 1; v < kLevels; ++v) {
    if (v >= 0) above += dist.count(v);
  }
  return static_cast<double>(above) / static_cast<double>(dist.total());
}

}  // namespace lumibal::brightness
