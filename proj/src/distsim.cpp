#include "lumibal/distsim.hpp"

#include <algorithm>
#include <cstring>

#include "lumibal/error.hpp"

namespace lumibal::distsim {
namespace {

// Totals up to 2^26 keep every t1 * t2 * 2 below 2^53.
constexpr double kExactTotalLimit = 67108864.0;

// sum_v min(a[v] * tb, b[v] * ta). All terms are integers below 2^53, so the
// vectorised reduction is exact and order independent.
inline double min_cross_sum(const double* __restrict a, double ta, const double* __restrict b,
                            double tb) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (int v = 0; v < kLevels; ++v) {
    const double x = a[v] * tb;
    const double y = b[v] * ta;
    s += x < y ? x : y;
  }
  return s;
}

double iou_relfreq(const double* a, double ta, const double* b, double tb) {
  double inter = 0.0;
  double uni = 0.0;
  for (int v = 0; v < kLevels; ++v) {
    const double x = a[v] / ta;
    const double y = b[v] / tb;
    inter += std::min(x, y);
    uni += std::max(x, y);
  }
  return inter / uni;
}

inline double iou_exact(const double* a, double ta, const double* b, double tb) {
  const double inter = min_cross_sum(a, ta, b, tb);
  return inter / (2.0 * ta * tb - inter);
}

}  // namespace

std::string_view to_string(Assignment a) {
  return a == Assignment::Straight ? "straight" : "crossed";
}

double iou(const BrightnessDistribution& a, const BrightnessDistribution& b) {
  const auto ta = a.total();
  const auto tb = b.total();
  if (ta == 0 || tb == 0) throw Error(ErrorCode::kDegenerate, "IoU of an empty distribution");
  if (static_cast<double>(ta) <= kExactTotalLimit && static_cast<double>(tb) <= kExactTotalLimit) {
    std::uint64_t inter = 0;
    for (int v = 0; v < kLevels; ++v) inter += std::min(a.count(v) * tb, b.count(v) * ta);
    const std::uint64_t uni = 2 * ta * tb - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
  }
  std::array<double, kLevels> ca{};
  std::array<double, kLevels> cb{};
  for (int v = 0; v < kLevels; ++v) {
    ca[v] = static_cast<double>(a.count(v));
    cb[v] = static_cast<double>(b.count(v));
  }
  return iou_relfreq(ca.data(), static_cast<double>(ta), cb.data(), static_cast<double>(tb));
}

SetValue bdiou_set(const BrightnessDistribution& c1, const BrightnessDistribution& c2,
                   const BrightnessDistribution& a1, const BrightnessDistribution& a2) {
  return combine_set(iou(c1, a1), iou(c2, a2), iou(c2, a1), iou(c1, a2));
}

DistributionTable::DistributionTable(std::span<const ImageRecord> images) {
  counts_.reserve(images.size() * kLevels);
  totals_.reserve(images.size());
  for (const auto& img : images) append(img.dist);
}

DistributionTable::DistributionTable(std::span<const BrightnessDistribution> dists) {
  counts_.reserve(dists.size() * kLevels);
  totals_.reserve(dists.size());
  for (const auto& d : dists) append(d);
}

void DistributionTable::append(const BrightnessDistribution& d) {
  for (int v = 0; v < kLevels; ++v) counts_.push_back(static_cast<double>(d.count(v)));
  const auto t = static_cast<double>(d.total());
  totals_.push_back(t);
  exact_ = exact_ && t <= kExactTotalLimit;
}

double DistributionTable::iou(std::size_t i, const DistributionTable& other, std::size_t j) const {
  if (exact_ && other.exact_) return iou_exact(row(i), total(i), other.row(j), other.total(j));
  return iou_relfreq(row(i), total(i), other.row(j), other.total(j));
}

void scan_set_scores(const ScanInput& input, double min_bdiou, const ScoreSink& sink) {
  const double threshold = std::clamp(min_bdiou, 0.0, 1.0);
  const auto& cf_table = *input.cf_images;
  const auto& af_table = *input.af_images;
  const auto cf_pairs = input.cf_pairs;
  const auto af_pairs = input.af_pairs;
  if (cf_pairs.empty() || af_pairs.empty()) return;

  // Columns: the distinct af images referenced by af pairs.
  std::vector<std::int64_t> column_of(af_table.size(), -1);
  std::vector<std::uint32_t> columns;
  for (const auto& p : af_pairs) {
    for (auto img : {p.x, p.y}) {
      if (column_of[img] < 0) {
        column_of[img] = static_cast<std::int64_t>(columns.size());
        columns.push_back(img);
      }
    }
  }
  std::vector<std::array<std::uint32_t, 2>> af_cols(af_pairs.size());
  for (std::size_t k = 0; k < af_pairs.size(); ++k) {
    af_cols[k] = {static_cast<std::uint32_t>(column_of[af_pairs[k].x]),
                  static_cast<std::uint32_t>(column_of[af_pairs[k].y])};
  }
  const std::size_t n_cols = columns.size();

  // Row blocks: the block's distinct cf images times all columns stays near
  // kMatrixBudget entries.
  constexpr std::size_t kMatrixBudget = std::size_t{1} << 22;
  const std::size_t block_pairs = std::max<std::size_t>(1, kMatrixBudget / (2 * n_cols));

  std::vector<std::int64_t> local_of(cf_table.size(), -1);
  std::vector<std::uint32_t> local_images;
  std::vector<double> matrix;
  std::vector<std::vector<SetScore>> rows;

  for (std::size_t begin = 0; begin < cf_pairs.size(); begin += block_pairs) {
    const std::size_t end = std::min(cf_pairs.size(), begin + block_pairs);

    for (auto img : local_images) local_of[img] = -1;
    local_images.clear();
    for (std::size_t r = begin; r < end; ++r) {
      for (auto img : {cf_pairs[r].x, cf_pairs[r].y}) {
        if (local_of[img] < 0) {
          local_of[img] = static_cast<std::int64_t>(local_images.size());
          local_images.push_back(img);
        }
      }
    }

    const auto n_local = static_cast<std::ptrdiff_t>(local_images.size());
    matrix.resize(local_images.size() * n_cols);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t li = 0; li < n_local; ++li) {
      double* out = matrix.data() + static_cast<std::size_t>(li) * n_cols;
      const auto ci = local_images[li];
      for (std::size_t c = 0; c < n_cols; ++c) out[c] = cf_table.iou(ci, af_table, columns[c]);
    }

    rows.resize(end - begin);
    const auto n_rows = static_cast<std::ptrdiff_t>(end - begin);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t rr = 0; rr < n_rows; ++rr) {
      const std::size_t r = begin + static_cast<std::size_t>(rr);
      const double* m1 = matrix.data() + static_cast<std::size_t>(local_of[cf_pairs[r].x]) * n_cols;
      const double* m2 = matrix.data() + static_cast<std::size_t>(local_of[cf_pairs[r].y]) * n_cols;
      auto& row = rows[rr];
      row.clear();
      for (std::size_t k = 0; k < af_cols.size(); ++k) {
        const auto [a1, a2] = af_cols[k];
        const SetValue v = combine_set(m1[a1], m2[a2], m2[a1], m1[a2]);
        if (v.bdiou >= threshold) {
          row.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(k), v.bdiou,
                         v.assignment});
        }
      }
    }
    for (const auto& row : rows) {
      if (!row.empty()) sink(row);
    }
  }
}

std::vector<SetScore> collect_set_scores(const ScanInput& input, double min_bdiou) {
  std::vector<SetScore> out;
  scan_set_scores(input, min_bdiou, [&](std::span<const SetScore> block) {
    out.insert(out.end(), block.begin(), block.end());
  });
  return out;
}

DatasetScan::DatasetScan(const CohortDataset& cf, std::span<const std::size_t> cf_pair_pos,
                         const CohortDataset& af, std::span<const std::size_t> af_pair_pos)
    : cf_table(cf.images()), af_table(af.images()) {
  cf_pairs.reserve(cf_pair_pos.size());
  for (auto pos : cf_pair_pos) {
    const auto& p = cf.pairs()[pos];
    cf_pairs.push_back({static_cast<std::uint32_t>(p.x_index), static_cast<std::uint32_t>(p.y_index)});
  }
  af_pairs.reserve(af_pair_pos.size());
  for (auto pos : af_pair_pos) {
    const auto& p = af.pairs()[pos];
    af_pairs.push_back({static_cast<std::uint32_t>(p.x_index), static_cast<std::uint32_t>(p.y_index)});
  }
}

}  // namespace lumibal::distsim
