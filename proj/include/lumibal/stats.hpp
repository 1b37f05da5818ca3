#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "lumibal/balancing.hpp"
#include "lumibal/types.hpp"

namespace lumibal::stats {

// Population statistics (divisor n).
struct CohortScoreStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};

inline constexpr std::string_view kDprimeFormula =
    "|mean_a - mean_b| / sqrt((std_a^2 + std_b^2) / 2), std divisor n";

// Throws Error(kInsufficient) on an empty list.
CohortScoreStats score_stats(std::span<const double> scores);

// Sensitivity index between two score distributions. Throws
// Error(kInsufficient) if either side has n < 2 and Error(kDegenerate) when
// both deviations are zero but the means differ.
double dprime(const CohortScoreStats& a, const CohortScoreStats& b);

// 100 * (balanced - baseline) / baseline. Throws Error(kRange) on a zero baseline.
double shift_pct(double balanced, double baseline);

// Inverse of shift_pct: the baseline a reported (balanced, shift %) pair
// implies. Throws Error(kRange) when shift is -100%.
double implied_baseline(double balanced, double shift);

struct BaselineStats {
  CohortScoreStats cohort_a;
  CohortScoreStats cohort_b;
  double dprime = 0.0;
};

BaselineStats baseline(const CohortDataset& a, const CohortDataset& b);

struct FactorSummary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

FactorSummary summarize(std::span<const double> values);

struct ReportRow {
  balancing::Strategy strategy = balancing::Strategy::BvdTopN;
  std::string selection;  // e.g. "top" or the BDM grouping label
  std::size_t n_pairs = 0;
  std::size_t trials = 1;
  double mean_a = 0.0;
  double shift_a = 0.0;
  double mean_b = 0.0;
  double shift_b = 0.0;
  double dprime = 0.0;
  double dprime_shift = 0.0;
  std::optional<FactorSummary> factor;
};

// Per-trial means and d' are averaged across `trials`; shifts are taken
// against `base` from the averaged values. Throws Error(kReference) on ids
// that do not resolve.
ReportRow evaluate_subset(std::span<const balancing::BalancedSubset> trials,
                          const CohortDataset& a, const CohortDataset& b,
                          const BaselineStats& base);

}  // namespace lumibal::stats
