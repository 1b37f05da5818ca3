#include "lumibal/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lumibal/error.hpp"

namespace lumibal {
namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool skip_line(std::string_view s) { return s.empty() || s.front() == '#'; }

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void expect_schema(std::istream& in, std::string_view schema, std::string_view source) {
  std::string line;
  if (!std::getline(in, line) || chomp(line) != schema) {
    throw Error(ErrorCode::kIngestion,
                where(source, 1) + "expected schema tag '" + std::string(schema) + "'");
  }
}

ImageRecord parse_image_line(std::string_view line, std::string_view source, std::size_t lineno) {
  const auto fields = split(line, '\t');
  if (fields.size() != 4 && fields.size() != 6) {
    throw Error(ErrorCode::kIngestion, where(source, lineno) + "expected 4 or 6 tab-separated fields, got " +
                                           std::to_string(fields.size()));
  }
  ImageRecord rec;
  rec.image_id = std::string(fields[0]);
  rec.subject_id = std::string(fields[1]);
  if (!is_valid_id(rec.image_id) || !is_valid_id(rec.subject_id)) {
    throw Error(ErrorCode::kIngestion, where(source, lineno) + "invalid image_id or subject_id");
  }
  const auto cohort = parse_cohort(fields[2]);
  if (!cohort) {
    throw Error(ErrorCode::kIngestion, where(source, lineno) + "unknown cohort '" + std::string(fields[2]) + "'");
  }
  rec.cohort = *cohort;

  BrightnessDistribution::Counts counts{};
  std::size_t bins = 0;
  std::string_view rest = fields[3];
  while (!rest.empty()) {
    const auto pos = rest.find(' ');
    const auto tok = rest.substr(0, pos);
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    if (tok.empty()) continue;
    if (tok.front() == '-') {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "negative count");
    }
    std::uint64_t v = 0;
    if (!parse_number(tok, v)) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "malformed count '" + std::string(tok) + "'");
    }
    if (bins < counts.size()) counts[bins] = v;
    ++bins;
  }
  if (bins != static_cast<std::size_t>(kLevels)) {
    throw Error(ErrorCode::kIngestion, where(source, lineno) + "expected 256 bins, got " + std::to_string(bins));
  }
  try {
    rec.dist = BrightnessDistribution(counts);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIngestion, where(source, lineno) + e.what());
  }

  if (fields.size() == 6) {
    double bv = 0;
    if (!parse_number(fields[4], bv) || std::round(bv * 2) != bv * 2 || bv < 0 || bv > 255) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "malformed bv '" + std::string(fields[4]) + "'");
    }
    rec.bv = HalfStep::from_halves(static_cast<std::int32_t>(bv * 2));
    rec.modality = parse_modality(fields[5]);
    if (!rec.modality) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "unknown modality '" + std::string(fields[5]) + "'");
    }
  }
  return rec;
}

std::vector<ImageRecord> read_images_impl(std::istream& in, std::optional<Cohort> cohort,
                                          std::string_view source) {
  expect_schema(in, kHistogramSchema, source);
  std::vector<ImageRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = chomp(line);
    if (skip_line(view)) continue;
    auto rec = parse_image_line(view, source, lineno);
    if (cohort && rec.cohort != *cohort) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "record cohort " +
                                             std::string(to_string(rec.cohort)) + " in a cohort " +
                                             std::string(to_string(*cohort)) + " file");
    }
    if (!seen.emplace(rec.image_id, lineno).second) {
      throw Error(ErrorCode::kConflict, where(source, lineno) + "duplicate image_id '" + rec.image_id + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

bool is_valid_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ',' || c == '\t' || c == ' ' || c == '\n' || c == '\r') return false;
  }
  return true;
}

std::vector<ImageRecord> read_images(std::istream& in, Cohort cohort, std::string_view source) {
  return read_images_impl(in, cohort, source);
}

std::vector<ImageRecord> read_images_any(std::istream& in, std::string_view source) {
  return read_images_impl(in, std::nullopt, source);
}

std::vector<ImageRecord> load_images(const std::filesystem::path& path, Cohort cohort) {
  auto in = open_input(path);
  return read_images(in, cohort, path.string());
}

std::vector<MatedPair> read_pairs(std::istream& in, const CohortDataset& images,
                                  std::string_view source) {
  expect_schema(in, kPairSchema, source);
  std::string line;
  std::size_t lineno = 1;
  bool header = false;
  std::vector<MatedPair> pairs;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = chomp(line);
    if (skip_line(view)) continue;
    if (!header) {
      if (view != "pair_id,image_x,image_y,score") {
        throw Error(ErrorCode::kIngestion, where(source, lineno) + "expected header 'pair_id,image_x,image_y,score'");
      }
      header = true;
      continue;
    }
    const auto f = split(view, ',');
    if (f.size() != 4) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "expected 4 fields, got " + std::to_string(f.size()));
    }
    MatedPair p;
    p.pair_id = std::string(f[0]);
    p.img_x = std::string(f[1]);
    p.img_y = std::string(f[2]);
    if (!is_valid_id(p.pair_id)) throw Error(ErrorCode::kIngestion, where(source, lineno) + "invalid pair_id");
    if (!parse_number(f[3], p.score) || !std::isfinite(p.score)) {
      throw Error(ErrorCode::kIngestion, where(source, lineno) + "malformed score '" + std::string(f[3]) + "'");
    }
    if (p.score < -1.0 || p.score > 1.0) {
      throw Error(ErrorCode::kRange, where(source, lineno) + "score " + std::string(f[3]) + " outside [-1, 1]");
    }
    for (const auto& ref : {p.img_x, p.img_y}) {
      if (images.find_image(ref) == nullptr) {
        throw Error(ErrorCode::kReference, where(source, lineno) + "unknown image_id '" + ref + "'");
      }
    }
    if (p.img_x == p.img_y) {
      throw Error(ErrorCode::kIntegrity, where(source, lineno) + "pair repeats image '" + p.img_x + "'");
    }
    if (images.find_image(p.img_x)->subject_id != images.find_image(p.img_y)->subject_id) {
      throw Error(ErrorCode::kIntegrity, where(source, lineno) + "pair '" + p.pair_id + "' spans two subjects");
    }
    if (!seen.emplace(p.pair_id, lineno).second) {
      throw Error(ErrorCode::kConflict, where(source, lineno) + "duplicate pair_id '" + p.pair_id + "'");
    }
    pairs.push_back(std::move(p));
  }
  if (!header) throw Error(ErrorCode::kIngestion, where(source, lineno) + "missing column header");
  return pairs;
}

CohortDataset load_pairs(const std::filesystem::path& path, CohortDataset images) {
  auto in = open_input(path);
  auto pairs = read_pairs(in, images, path.string());
  images.set_pairs(std::move(pairs));
  return images;
}

CohortDataset load_dataset(const std::filesystem::path& images_path,
                           const std::filesystem::path& pairs_path, Cohort cohort) {
  CohortDataset ds(cohort);
  ds.set_images(load_images(images_path, cohort));
  return load_pairs(pairs_path, std::move(ds));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // no "-0.000"
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string out(buf, ptr);
  if (out.starts_with('-') && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

void write_images(std::ostream& out, std::span<const ImageRecord> images, bool annotate) {
  out << kHistogramSchema << '\n';
  for (const auto& img : images) {
    out << img.image_id << '\t' << img.subject_id << '\t' << to_string(img.cohort) << '\t';
    for (int v = 0; v < kLevels; ++v) {
      if (v) out << ' ';
      out << img.dist.count(v);
    }
    if (annotate && img.bv && img.modality) {
      out << '\t' << format_double(img.bv->value()) << '\t' << to_string(*img.modality);
    }
    out << '\n';
  }
}

void write_pairs(std::ostream& out, std::span<const MatedPair> pairs) {
  out << kPairSchema << '\n' << "pair_id,image_x,image_y,score\n";
  for (const auto& p : pairs) {
    out << p.pair_id << ',' << p.img_x << ',' << p.img_y << ',' << format_double(p.score) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move output into '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lumibal
