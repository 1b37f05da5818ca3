#include "lumibal/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "lumibal/io.hpp"

namespace lumibal::report {
namespace {

std::string num(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  return format_fixed(v, decimals);
}

nlohmann::json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void csv_line(std::ostringstream& out, std::string_view strategy, std::string_view selection,
              std::size_t n, std::size_t trials, std::string_view cohort, double mean, double shift,
              double dprime, double dprime_shift, const std::optional<stats::FactorSummary>& f) {
  out << strategy << ',' << selection << ',' << n << ',' << trials << ',' << cohort << ','
      << num(mean, 6) << ',' << num(shift, 4) << ',' << num(dprime, 6) << ',' << num(dprime_shift, 4);
  if (f) {
    out << ',' << num(f->mean, 6) << ',' << num(f->std, 6) << ',' << num(f->min, 6) << ','
        << num(f->max, 6);
  } else {
    out << ",,,,";
  }
  out << '\n';
}

}  // namespace

std::string to_csv(const stats::BaselineStats& base, std::span<const stats::ReportRow> rows,
                   const CohortLabels& labels) {
  std::ostringstream out;
  out << "strategy,selection,n,trials,cohort,score_mean,score_shift_pct,dprime,dprime_shift_pct,"
         "factor_mean,factor_std,factor_min,factor_max\n";
  csv_line(out, "BASELINE", "all", base.cohort_a.n, 1, labels.a, base.cohort_a.mean, 0.0, base.dprime,
           0.0, std::nullopt);
  csv_line(out, "BASELINE", "all", base.cohort_b.n, 1, labels.b, base.cohort_b.mean, 0.0, base.dprime,
           0.0, std::nullopt);
  for (const auto& r : rows) {
    const auto strategy = balancing::to_string(r.strategy);
    const std::string selection = r.selection.empty() ? "top" : r.selection;
    // Commas inside a grouping label would break the column layout.
    std::string safe = selection;
    for (auto& c : safe) {
      if (c == ',') c = '+';
    }
    csv_line(out, strategy, safe, r.n_pairs, r.trials, labels.a, r.mean_a, r.shift_a, r.dprime,
             r.dprime_shift, r.factor);
    csv_line(out, strategy, safe, r.n_pairs, r.trials, labels.b, r.mean_b, r.shift_b, r.dprime,
             r.dprime_shift, r.factor);
  }
  return out.str();
}

std::string to_json(const stats::BaselineStats& base, std::span<const stats::ReportRow> rows,
                    const CohortLabels& labels) {
  nlohmann::ordered_json j;
  j["dprime_formula"] = stats::kDprimeFormula;
  j["cohorts"] = {{"A", labels.a}, {"B", labels.b}};
  j["baseline"] = {
      {"A", {{"n", base.cohort_a.n}, {"mean", base.cohort_a.mean}, {"std", base.cohort_a.std}}},
      {"B", {{"n", base.cohort_b.n}, {"mean", base.cohort_b.mean}, {"std", base.cohort_b.std}}},
      {"dprime", base.dprime}};
  auto& out_rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["strategy"] = balancing::to_string(r.strategy);
    row["selection"] = r.selection.empty() ? "top" : r.selection;
    row["n"] = r.n_pairs;
    row["trials"] = r.trials;
    row["A"] = {{"mean", r.mean_a}, {"shift_pct", num_json(r.shift_a)}};
    row["B"] = {{"mean", r.mean_b}, {"shift_pct", num_json(r.shift_b)}};
    row["dprime"] = r.dprime;
    row["dprime_shift_pct"] = num_json(r.dprime_shift);
    if (r.factor) {
      row["factor"] = {{"mean", r.factor->mean},
                       {"std", r.factor->std},
                       {"min", r.factor->min},
                       {"max", r.factor->max}};
    } else {
      row["factor"] = nullptr;
    }
    out_rows.push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string plot_data(std::span<const stats::ReportRow> rows) {
  std::ostringstream out;
  out << "strategy,n,factor_mean,dprime_shift_pct\n";
  for (const auto& r : rows) {
    if (!r.factor) continue;
    out << balancing::to_string(r.strategy) << ',' << r.n_pairs << ',' << num(r.factor->mean, 6) << ','
        << num(r.dprime_shift, 4) << '\n';
  }
  return out.str();
}

}  // namespace lumibal::report
