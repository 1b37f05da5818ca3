#include "lumibal/extract.hpp"

#include <map>

#include <opencv2/imgcodecs.hpp>

#include "lumibal/error.hpp"
#include "lumibal/io.hpp"

namespace lumibal::extract {
namespace {

namespace fs = std::filesystem;

cv::Mat read_image(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw Error(ErrorCode::kIo, "cannot decode '" + path.string() + "'");
  if (img.depth() != CV_8U) throw Error(ErrorCode::kIngestion, "'" + path.string() + "' is not 8-bit");
  return img;
}

struct Entry {
  fs::path crop;
  fs::path mask;
};

}  // namespace

brightness::MaskedCrop load_masked_crop(const fs::path& crop_path, const fs::path& mask_path) {
  const cv::Mat crop = read_image(crop_path);
  const cv::Mat mask = read_image(mask_path);
  if (crop.rows != mask.rows || crop.cols != mask.cols) {
    throw Error(ErrorCode::kIngestion, "crop/mask dimension mismatch for '" + crop_path.string() + "'");
  }
  if (mask.channels() != 1) {
    throw Error(ErrorCode::kIngestion, "mask '" + mask_path.string() + "' must be single-channel");
  }
  const int channels = crop.channels();
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error(ErrorCode::kIngestion, "crop '" + crop_path.string() + "' has unsupported channel count");
  }

  brightness::MaskedCrop out;
  out.width = crop.cols;
  out.height = crop.rows;
  out.gray.reserve(static_cast<std::size_t>(crop.rows) * crop.cols);
  out.mask.reserve(out.gray.capacity());
  for (int r = 0; r < crop.rows; ++r) {
    const auto* src = crop.ptr<std::uint8_t>(r);
    const auto* m = mask.ptr<std::uint8_t>(r);
    for (int c = 0; c < crop.cols; ++c) {
      if (channels == 1) {
        out.gray.push_back(src[c]);
      } else {
        // OpenCV stores colour pixels as BGR(A).
        const auto* px = src + static_cast<std::size_t>(c) * channels;
        out.gray.push_back(brightness::grayscale_luma(px[2], px[1], px[0]));
      }
      out.mask.push_back(m[c]);
    }
  }
  return out;
}

ExtractResult extract_directory(const fs::path& dir, Cohort cohort) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: '" + dir.string() + "'");
  std::map<std::string, Entry> entries;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (!f.is_regular_file()) continue;
    const auto stem = f.path().stem();        // "<id>.crop"
    const auto kind = stem.extension().string();
    const auto id = stem.stem().string();
    if (kind == ".crop") entries[id].crop = f.path();
    if (kind == ".mask") entries[id].mask = f.path();
  }

  ExtractResult out;
  for (const auto& [id, e] : entries) {
    if (e.crop.empty() || e.mask.empty()) {
      out.errors.push_back(id + ": missing " + std::string(e.crop.empty() ? "crop" : "mask") + " file");
      continue;
    }
    const auto sep = id.find("__");
    if (sep == std::string::npos || sep == 0 || !is_valid_id(id)) {
      out.errors.push_back(id + ": file name does not follow <subject_id>__<tag>");
      continue;
    }
    try {
      const auto crop = load_masked_crop(e.crop, e.mask);
      ImageRecord rec;
      rec.image_id = id;
      rec.subject_id = id.substr(0, sep);
      rec.cohort = cohort;
      rec.dist = brightness::histogram_from_masked(crop);
      out.records.push_back(std::move(rec));
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kEmptyRegion) {
        out.warnings.push_back(id + ": empty face region, skipped");
      } else {
        out.errors.push_back(id + ": " + err.what());
      }
    }
  }
  return out;
}

}  // namespace lumibal::extract
