#include "lumibal/modality.hpp"

#include <algorithm>

#include "lumibal/error.hpp"

namespace lumibal::modality {

void ModalityConfig::validate() const {
  if (sw < 1) throw Error(ErrorCode::kConfig, "smoothing window must be >= 1");
  if (!(rt > 0.0 && rt <= 1.0)) throw Error(ErrorCode::kConfig, "relative threshold must be in (0, 1]");
  if (!(prominence >= 0.0 && prominence <= 1.0)) {
    throw Error(ErrorCode::kConfig, "prominence must be in [0, 1]");
  }
}

std::array<double, kLevels> smooth(const BrightnessDistribution& dist, int sw) {
  if (sw < 1) throw Error(ErrorCode::kConfig, "smoothing window must be >= 1");
  std::array<std::uint64_t, kLevels + 1> prefix{};
  for (int v = 0; v < kLevels; ++v) prefix[v + 1] = prefix[v] + dist.count(v);
  std::array<double, kLevels> out{};
  for (int i = 0; i < kLevels; ++i) {
    const int lo = std::max(0, i - sw);
    const int hi = std::min(kLevels - 1, i + sw);
    out[i] = static_cast<double>(prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

PeakSet detect_peaks(std::span<const double, kLevels> s, double rt, double prominence) {
  const double top = *std::ranges::max_element(s);
  if (!(top > 0.0)) throw Error(ErrorCode::kDegenerate, "degenerate distribution");

  PeakSet out;
  std::ranges::copy(s, out.smoothed.begin());
  out.threshold_used = rt * top;
  const double min_prominence = prominence * top;

  int i = 0;
  while (i < kLevels) {
    int j = i;
    while (j + 1 < kLevels && s[j + 1] == s[i]) ++j;
    const double h = s[i];
    const bool rises = i == 0 || s[i - 1] < h;
    const bool falls = j == kLevels - 1 || s[j + 1] < h;
    if (rises && falls && h >= out.threshold_used) {
      // Lowest point before reaching higher ground on each side. An equal
      // maximum further left counts as higher, so of several equal separated
      // maxima only the leftmost keeps its full height as prominence.
      double base = 0.0;
      if (i > 0) {
        double left = h;
        for (int l = i - 1; l >= 0 && s[l] < h; --l) left = std::min(left, s[l]);
        base = left;
      }
      if (j < kLevels - 1) {
        double right = h;
        for (int r = j + 1; r < kLevels && s[r] <= h; ++r) right = std::min(right, s[r]);
        base = i > 0 ? std::max(base, right) : right;
      }
      if (h - base >= min_prominence) out.peaks.push_back(i + (j - i) / 2);
    }
    i = j + 1;
  }
  return out;
}

PeakSet analyze(const BrightnessDistribution& dist, const ModalityConfig& cfg) {
  const auto smoothed = smooth(dist, cfg.sw);
  return detect_peaks(smoothed, cfg.rt, cfg.prominence);
}

Modality classify(const BrightnessDistribution& dist, const ModalityConfig& cfg) {
  const auto n = analyze(dist, cfg).peaks.size();
  if (n <= 1) return Modality::Uni;
  if (n == 2) return Modality::Bi;
  return Modality::Multi;
}

PairType pair_type(Modality m1, Modality m2) {
  if (m2 < m1) std::swap(m1, m2);
  switch (m1) {
    case Modality::Uni:
      return m2 == Modality::Uni ? PairType::UU : (m2 == Modality::Bi ? PairType::UB : PairType::UM);
    case Modality::Bi:
      return m2 == Modality::Bi ? PairType::BB : PairType::BM;
    case Modality::Multi:
      return PairType::MM;
  }
  return PairType::UU;
}

bool is_non_uni(PairType t) {
  return t == PairType::BB || t == PairType::MM || t == PairType::BM;
}

}  // namespace lumibal::modality
