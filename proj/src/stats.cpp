#include "lumibal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lumibal/error.hpp"

namespace lumibal::stats {
namespace {

// Shift against a zero baseline is only meaningful when nothing moved.
double shift_or_nan(double balanced, double baseline) {
  if (baseline == 0.0) return balanced == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return shift_pct(balanced, baseline);
}

std::vector<double> gather_scores(const std::vector<std::string>& ids, const CohortDataset& ds) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto* p = ds.find_pair(id);
    if (p == nullptr) {
      throw Error(ErrorCode::kReference, "subset pair '" + id + "' not found in cohort " +
                                             std::string(to_string(ds.cohort())));
    }
    out.push_back(p->score);
  }
  return out;
}

}  // namespace

CohortScoreStats score_stats(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kInsufficient, "no scores");
  const auto n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (double s : scores) sum += s;
  double mean = sum / n;
  // One correction pass; constant inputs then come back with their exact value
  // and zero deviation instead of rounding noise.
  double residual = 0.0;
  for (double s : scores) residual += s - mean;
  mean += residual / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return {scores.size(), mean, std::sqrt(ss / n)};
}

double dprime(const CohortScoreStats& a, const CohortScoreStats& b) {
  if (a.n < 2 || b.n < 2) throw Error(ErrorCode::kInsufficient, "d' needs at least two scores per cohort");
  const double gap = std::abs(a.mean - b.mean);
  const double pooled = std::sqrt((a.std * a.std + b.std * b.std) / 2.0);
  if (pooled == 0.0) {
    if (gap == 0.0) return 0.0;
    throw Error(ErrorCode::kDegenerate, "degenerate variance");
  }
  return gap / pooled;
}

double shift_pct(double balanced, double baseline) {
  if (baseline == 0.0) throw Error(ErrorCode::kRange, "zero baseline");
  return 100.0 * (balanced - baseline) / baseline;
}

double implied_baseline(double balanced, double shift) {
  const double scale = 1.0 + shift / 100.0;
  if (scale == 0.0) throw Error(ErrorCode::kRange, "shift of -100% has no baseline");
  return balanced / scale;
}

BaselineStats baseline(const CohortDataset& a, const CohortDataset& b) {
  std::vector<double> sa;
  std::vector<double> sb;
  for (const auto& p : a.pairs()) sa.push_back(p.score);
  for (const auto& p : b.pairs()) sb.push_back(p.score);
  BaselineStats out;
  out.cohort_a = score_stats(sa);
  out.cohort_b = score_stats(sb);
  out.dprime = dprime(out.cohort_a, out.cohort_b);
  return out;
}

FactorSummary summarize(std::span<const double> values) {
  const auto st = score_stats(values);
  const auto [lo, hi] = std::ranges::minmax_element(values);
  return {st.mean, st.std, *lo, *hi};
}

ReportRow evaluate_subset(std::span<const balancing::BalancedSubset> trials, const CohortDataset& a,
                          const CohortDataset& b, const BaselineStats& base) {
  if (trials.empty()) throw Error(ErrorCode::kInsufficient, "no trials to evaluate");
  ReportRow row;
  row.strategy = trials.front().strategy;
  row.n_pairs = trials.front().n;
  row.trials = trials.size();
  row.selection = trials.front().provenance_value("grouping");

  FactorSummary factor_sum;
  bool has_factor = true;
  for (const auto& t : trials) {
    const auto sa = score_stats(gather_scores(t.cf_pair_ids, a));
    const auto sb = score_stats(gather_scores(t.af_pair_ids, b));
    row.mean_a += sa.mean;
    row.mean_b += sb.mean;
    row.dprime += dprime(sa, sb);
    if (t.factors.empty()) {
      has_factor = false;
    } else {
      const auto f = summarize(t.factors);
      factor_sum.mean += f.mean;
      factor_sum.std += f.std;
      factor_sum.min += f.min;
      factor_sum.max += f.max;
    }
  }
  const auto k = static_cast<double>(trials.size());
  row.mean_a /= k;
  row.mean_b /= k;
  row.dprime /= k;
  if (has_factor) {
    row.factor = FactorSummary{factor_sum.mean / k, factor_sum.std / k, factor_sum.min / k,
                               factor_sum.max / k};
  }
  row.shift_a = shift_or_nan(row.mean_a, base.cohort_a.mean);
  row.shift_b = shift_or_nan(row.mean_b, base.cohort_b.mean);
  row.dprime_shift = shift_or_nan(row.dprime, base.dprime);
  return row;
}

}  // namespace lumibal::stats
