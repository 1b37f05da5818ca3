#include "lumibal/types.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_set>

#include "lumibal/error.hpp"

namespace lumibal {

std::string_view error_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIngestion: return "E_INGESTION";
    case ErrorCode::kConflict: return "E_CONFLICT";
    case ErrorCode::kReference: return "E_REFERENCE";
    case ErrorCode::kIntegrity: return "E_INTEGRITY";
    case ErrorCode::kRange: return "E_RANGE";
    case ErrorCode::kEmptyRegion: return "E_EMPTY_REGION";
    case ErrorCode::kDegenerate: return "E_DEGENERATE";
    case ErrorCode::kInsufficient: return "E_INSUFFICIENT";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kConfig: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

std::string_view to_string(Cohort c) { return c == Cohort::A ? "A" : "B"; }

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Uni: return "Uni";
    case Modality::Bi: return "Bi";
    case Modality::Multi: return "Multi";
  }
  return "?";
}

std::string_view to_string(PairType t) {
  switch (t) {
    case PairType::UU: return "UU";
    case PairType::BB: return "BB";
    case PairType::MM: return "MM";
    case PairType::UB: return "UB";
    case PairType::UM: return "UM";
    case PairType::BM: return "BM";
  }
  return "?";
}

std::optional<Cohort> parse_cohort(std::string_view s) {
  if (s == "A") return Cohort::A;
  if (s == "B") return Cohort::B;
  return std::nullopt;
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "Uni") return Modality::Uni;
  if (s == "Bi") return Modality::Bi;
  if (s == "Multi") return Modality::Multi;
  return std::nullopt;
}

std::optional<PairType> parse_pair_type(std::string_view s) {
  std::string up(s);
  std::ranges::transform(up, up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (PairType t : kAllPairTypes) {
    if (to_string(t) == up) return t;
  }
  return std::nullopt;
}

BrightnessDistribution::BrightnessDistribution(const Counts& counts)
    : counts_(counts), total_(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0})) {
  if (total_ == 0) throw Error(ErrorCode::kIngestion, "empty distribution");
}

std::array<double, kLevels> BrightnessDistribution::relfreqs() const {
  std::array<double, kLevels> out{};
  for (int v = 0; v < kLevels; ++v) out[v] = relfreq(v);
  return out;
}

void CohortDataset::set_images(std::vector<ImageRecord> images) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (img.cohort != cohort_) {
      throw Error(ErrorCode::kIntegrity, "image '" + img.image_id + "' belongs to cohort " +
                                             std::string(to_string(img.cohort)) +
                                             ", dataset is cohort " +
                                             std::string(to_string(cohort_)));
    }
    if (!index.emplace(img.image_id, i).second) {
      throw Error(ErrorCode::kConflict, "duplicate image_id '" + img.image_id + "'");
    }
  }
  images_ = std::move(images);
  image_index_ = std::move(index);
  // Re-resolve any existing pairs against the new image list.
  if (!pairs_.empty()) set_pairs(std::move(pairs_));
}

void CohortDataset::set_pairs(std::vector<MatedPair> pairs) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& p = pairs[i];
    if (!index.emplace(p.pair_id, i).second) {
      throw Error(ErrorCode::kConflict, "duplicate pair_id '" + p.pair_id + "'");
    }
    const auto x = image_index_.find(p.img_x);
    const auto y = image_index_.find(p.img_y);
    if (x == image_index_.end() || y == image_index_.end()) {
      const auto& missing = x == image_index_.end() ? p.img_x : p.img_y;
      throw Error(ErrorCode::kReference,
                  "pair '" + p.pair_id + "' references unknown image '" + missing + "'");
    }
    if (p.img_x == p.img_y) {
      throw Error(ErrorCode::kIntegrity, "pair '" + p.pair_id + "' repeats image '" + p.img_x + "'");
    }
    const auto& ix = images_[x->second];
    const auto& iy = images_[y->second];
    if (ix.subject_id != iy.subject_id) {
      throw Error(ErrorCode::kIntegrity, "pair '" + p.pair_id + "' spans subjects '" +
                                             ix.subject_id + "' and '" + iy.subject_id + "'");
    }
    if (!(p.score >= -1.0 && p.score <= 1.0)) {
      throw Error(ErrorCode::kRange, "pair '" + p.pair_id + "' score out of [-1, 1]");
    }
    p.x_index = x->second;
    p.y_index = y->second;
  }
  pairs_ = std::move(pairs);
  pair_index_ = std::move(index);
}

const ImageRecord* CohortDataset::find_image(std::string_view id) const {
  const auto it = image_index_.find(std::string(id));
  return it == image_index_.end() ? nullptr : &images_[it->second];
}

const MatedPair* CohortDataset::find_pair(std::string_view id) const {
  const auto pos = pair_position(id);
  return pos ? &pairs_[*pos] : nullptr;
}

std::optional<std::size_t> CohortDataset::pair_position(std::string_view id) const {
  const auto it = pair_index_.find(std::string(id));
  if (it == pair_index_.end()) return std::nullopt;
  return it->second;
}

DatasetSummary dataset_summary(const CohortDataset& ds) {
  std::unordered_set<std::string_view> subjects;
  for (const auto& img : ds.images()) subjects.insert(img.subject_id);
  return {ds.images().size(), subjects.size(), ds.pairs().size()};
}

}  // namespace lumibal
