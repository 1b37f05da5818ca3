#pragma once

#include <span>
#include <string>

#include "lumibal/stats.hpp"

namespace lumibal::report {

struct CohortLabels {
  std::string a = "A";
  std::string b = "B";
};

// Two lines per row (one per cohort), columns:
// strategy,selection,n,cohort,score_mean,score_shift_pct,dprime,
// dprime_shift_pct,factor_mean,factor_std,factor_min,factor_max
std::string to_csv(const stats::BaselineStats& base, std::span<const stats::ReportRow> rows,
                   const CohortLabels& labels);
std::string to_json(const stats::BaselineStats& base, std::span<const stats::ReportRow> rows,
                    const CohortLabels& labels);
// factor_mean,dprime_shift_pct per strategy, rows with a factor only.
std::string plot_data(std::span<const stats::ReportRow> rows);

}  // namespace lumibal::report
