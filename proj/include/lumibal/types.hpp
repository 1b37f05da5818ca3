#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lumibal {

inline constexpr int kLevels = 256;

enum class Cohort : std::uint8_t { A, B };
enum class Modality : std::uint8_t { Uni, Bi, Multi };
enum class PairType : std::uint8_t { UU, BB, MM, UB, UM, BM };

inline constexpr std::array<PairType, 6> kAllPairTypes = {
    PairType::UU, PairType::BB, PairType::MM,
    PairType::UB, PairType::UM, PairType::BM};

std::string_view to_string(Cohort c);
std::string_view to_string(Modality m);
std::string_view to_string(PairType t);
std::optional<Cohort> parse_cohort(std::string_view s);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<PairType> parse_pair_type(std::string_view s);  // case-insensitive

// A brightness quantity on the half-integer grid (medians of 8-bit pixels).
// Stored as twice the value so equality is exact.
class HalfStep {
 public:
  constexpr HalfStep() = default;
  static constexpr HalfStep from_halves(std::int32_t halves) {
    HalfStep h;
    h.halves_ = halves;
    return h;
  }
  static constexpr HalfStep from_level(std::int32_t level) {
    return from_halves(2 * level);
  }

  constexpr std::int32_t halves() const { return halves_; }
  constexpr double value() const { return halves_ / 2.0; }

  friend constexpr HalfStep abs_diff(HalfStep a, HalfStep b) {
    return from_halves(a.halves_ > b.halves_ ? a.halves_ - b.halves_
                                             : b.halves_ - a.halves_);
  }
  friend constexpr auto operator<=>(HalfStep, HalfStep) = default;

 private:
  std::int32_t halves_ = 0;
};

// Per-image face-skin grayscale histogram.
class BrightnessDistribution {
 public:
  using Counts = std::array<std::uint64_t, kLevels>;

  BrightnessDistribution() = default;
  // Throws Error(kIngestion, "empty distribution") when every bin is zero.
  explicit BrightnessDistribution(const Counts& counts);

  const Counts& counts() const { return counts_; }
  std::uint64_t count(int level) const { return counts_[level]; }
  std::uint64_t total() const { return total_; }
  double relfreq(int level) const {
    return static_cast<double>(counts_[level]) / static_cast<double>(total_);
  }
  std::array<double, kLevels> relfreqs() const;

  friend bool operator==(const BrightnessDistribution&,
                         const BrightnessDistribution&) = default;

 private:
  Counts counts_{};
  std::uint64_t total_ = 0;
};

struct ImageRecord {
  std::string image_id;
  std::string subject_id;
  Cohort cohort = Cohort::A;
  BrightnessDistribution dist;
  std::optional<HalfStep> bv;
  std::optional<Modality> modality;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct MatedPair {
  std::string pair_id;
  std::string img_x;
  std::string img_y;
  double score = 0.0;
  // Positions of img_x / img_y inside the owning dataset's image list.
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  std::optional<HalfStep> bvd;
  std::optional<PairType> pair_type;

  friend bool operator==(const MatedPair&, const MatedPair&) = default;
};

struct DatasetSummary {
  std::size_t n_images = 0;
  std::size_t n_subjects = 0;
  std::size_t n_pairs = 0;
  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

// Images and mated pairs of one cohort. Pairs always reference images of
// this dataset; indices are kept in sync by the mutating helpers.
class CohortDataset {
 public:
  CohortDataset() = default;
  explicit CohortDataset(Cohort cohort) : cohort_(cohort) {}

  Cohort cohort() const { return cohort_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<MatedPair>& pairs() const { return pairs_; }
  std::vector<ImageRecord>& mutable_images() { return images_; }
  std::vector<MatedPair>& mutable_pairs() { return pairs_; }

  // Replace content; validates uniqueness and referential integrity.
  void set_images(std::vector<ImageRecord> images);
  void set_pairs(std::vector<MatedPair> pairs);

  const ImageRecord* find_image(std::string_view id) const;
  const MatedPair* find_pair(std::string_view id) const;
  std::optional<std::size_t> pair_position(std::string_view id) const;

  const ImageRecord& image_x(const MatedPair& p) const { return images_[p.x_index]; }
  const ImageRecord& image_y(const MatedPair& p) const { return images_[p.y_index]; }

  friend bool operator==(const CohortDataset& a, const CohortDataset& b) {
    return a.cohort_ == b.cohort_ && a.images_ == b.images_ && a.pairs_ == b.pairs_;
  }

 private:
  Cohort cohort_ = Cohort::A;
  std::vector<ImageRecord> images_;
  std::vector<MatedPair> pairs_;
  std::unordered_map<std::string, std::size_t> image_index_;
  std::unordered_map<std::string, std::size_t> pair_index_;
};

DatasetSummary dataset_summary(const CohortDataset& ds);

}  // namespace lumibal
