#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lumibal/types.hpp"

namespace lumibal::distsim {

enum class Assignment : std::uint8_t {
  Straight,  // C1-A1, C2-A2
  Crossed,   // C1-A2, C2-A1
};

std::string_view to_string(Assignment a);

// Intersection over union of the two relative-frequency histograms.
//
// Evaluated as sum_v min(c1[v]*t2, c2[v]*t1) / sum_v max(...), which is the
// relative-frequency ratio scaled by t1*t2. Every term is an integer, so the
// sums are exact in double for t1*t2 < 2^52 and the result does not depend on
// summation order. Larger totals fall back to relative frequencies.
double iou(const BrightnessDistribution& a, const BrightnessDistribution& b);

struct SetValue {
  double bdiou = 0.0;
  Assignment assignment = Assignment::Straight;
};

// Best of the two cross-cohort pairings of a set of four images.
SetValue bdiou_set(const BrightnessDistribution& c1, const BrightnessDistribution& c2,
                   const BrightnessDistribution& a1, const BrightnessDistribution& a2);

// Combines the four image IoUs of a set. Shared by every scan implementation
// so their outputs agree bit for bit.
inline SetValue combine_set(double c1a1, double c2a2, double c2a1, double c1a2) {
  const double straight = (c1a1 + c2a2) / 2.0;
  const double crossed = (c2a1 + c1a2) / 2.0;
  if (crossed > straight) return {crossed, Assignment::Crossed};
  return {straight, Assignment::Straight};
}

// Packed histograms for the scan kernels: counts as doubles, 64-byte rows.
class DistributionTable {
 public:
  DistributionTable() = default;
  explicit DistributionTable(std::span<const ImageRecord> images);
  explicit DistributionTable(std::span<const BrightnessDistribution> dists);

  std::size_t size() const { return totals_.size(); }
  const double* row(std::size_t i) const { return counts_.data() + i * kLevels; }
  double total(std::size_t i) const { return totals_[i]; }
  // True when every product of totals stays in the exact-integer range.
  bool exact() const { return exact_; }

  double iou(std::size_t i, const DistributionTable& other, std::size_t j) const;

 private:
  void append(const BrightnessDistribution& d);

  std::vector<double> counts_;
  std::vector<double> totals_;
  bool exact_ = true;
};

// A pair reduced to the positions of its two images in a DistributionTable.
struct PairRef {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
};

struct SetScore {
  std::uint32_t cf_index = 0;  // position in the cohort-A pair list
  std::uint32_t af_index = 0;  // position in the cohort-B pair list
  double bdiou = 0.0;
  Assignment assignment = Assignment::Straight;

  friend bool operator==(const SetScore&, const SetScore&) = default;
};

struct ScanInput {
  const DistributionTable* cf_images = nullptr;
  std::span<const PairRef> cf_pairs;
  const DistributionTable* af_images = nullptr;
  std::span<const PairRef> af_pairs;
};

using ScoreSink = std::function<void(std::span<const SetScore>)>;

// Scores every (cf pair, af pair) set and forwards those with
// bdiou >= min_bdiou (clamped to [0, 1]) to `sink`, cf-major / af-minor.
// Work is split across OpenMP threads in row blocks; blocks are delivered to
// `sink` in order from the calling thread.
void scan_set_scores(const ScanInput& input, double min_bdiou, const ScoreSink& sink);

std::vector<SetScore> collect_set_scores(const ScanInput& input, double min_bdiou);

// Convenience over datasets: pair lists are positions into ds.pairs().
struct DatasetScan {
  DistributionTable cf_table;
  DistributionTable af_table;
  std::vector<PairRef> cf_pairs;
  std::vector<PairRef> af_pairs;

  DatasetScan(const CohortDataset& cf, std::span<const std::size_t> cf_pair_pos,
              const CohortDataset& af, std::span<const std::size_t> af_pair_pos);
  ScanInput input() const { return {&cf_table, cf_pairs, &af_table, af_pairs}; }
};

}  // namespace lumibal::distsim
