#pragma once

// Text formats for histogram records, pair scores and balanced subsets.
//
// Histogram records (one image per line, tab separated):
//   #lumibal-histograms v1
//   <image_id> TAB <subject_id> TAB <A|B> TAB <256 space-separated counts>
//       [TAB <bv> TAB <Uni|Bi|Multi>]
//
// Pair scores (comma separated, header required):
//   #lumibal-pairs v1
//   pair_id,image_x,image_y,score
//
// Blank lines and lines starting with '#' after the schema tag are ignored.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lumibal/types.hpp"

namespace lumibal {

inline constexpr std::string_view kHistogramSchema = "#lumibal-histograms v1";
inline constexpr std::string_view kPairSchema = "#lumibal-pairs v1";

std::vector<ImageRecord> read_images(std::istream& in, Cohort cohort,
                                     std::string_view source = "<stream>");
std::vector<ImageRecord> load_images(const std::filesystem::path& path, Cohort cohort);

// Reads every record regardless of cohort (used by the `modality` command).
std::vector<ImageRecord> read_images_any(std::istream& in,
                                         std::string_view source = "<stream>");

std::vector<MatedPair> read_pairs(std::istream& in, const CohortDataset& images,
                                  std::string_view source = "<stream>");
// Resolves against `images`; returns the dataset with pairs attached.
CohortDataset load_pairs(const std::filesystem::path& path, CohortDataset images);

CohortDataset load_dataset(const std::filesystem::path& images_path,
                           const std::filesystem::path& pairs_path, Cohort cohort);

// `annotate` appends the bv / modality columns where they are set.
void write_images(std::ostream& out, std::span<const ImageRecord> images,
                  bool annotate = false);
void write_pairs(std::ostream& out, std::span<const MatedPair> pairs);

// Shortest round-trip decimal representation.
std::string format_double(double v);
std::string format_fixed(double v, int decimals);

// Writes through a sibling temp file and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Ids are single tokens: non-empty, no whitespace, no commas.
bool is_valid_id(std::string_view id);

}  // namespace lumibal
