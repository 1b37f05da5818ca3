#pragma once

// Crop/mask directory ingestion. Files pair up by name:
//   <subject_id>__<tag>.crop.<ext>   8-bit grayscale, RGB or RGBA crop
//   <subject_id>__<tag>.mask.<ext>   8-bit single-channel mask, nonzero = skin
// The image id is "<subject_id>__<tag>". Any format OpenCV can decode works.

#include <filesystem>
#include <string>
#include <vector>

#include "lumibal/brightness.hpp"
#include "lumibal/types.hpp"

namespace lumibal::extract {

// Throws Error(kIo) on unreadable files and Error(kIngestion) on mismatched
// dimensions or unsupported channel layouts.
brightness::MaskedCrop load_masked_crop(const std::filesystem::path& crop,
                                        const std::filesystem::path& mask);

struct ExtractResult {
  std::vector<ImageRecord> records;   // sorted by image_id
  std::vector<std::string> warnings;  // skipped images (empty masks)
  std::vector<std::string> errors;    // per-file failures
};

ExtractResult extract_directory(const std::filesystem::path& dir, Cohort cohort);

}  // namespace lumibal::extract
