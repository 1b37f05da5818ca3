#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumibal/balancing.hpp"
#include "lumibal/modality.hpp"
#include "lumibal/report.hpp"
#include "lumibal/stats.hpp"

namespace lumibal::pipeline {

struct DatasetPaths {
  std::filesystem::path images;
  std::filesystem::path pairs;
  std::string label;
};

struct BvdBlock {
  std::vector<std::size_t> top;
};

struct BdmEntry {
  balancing::BdmGrouping grouping;
  std::size_t n = 0;
};

struct BdmBlock {
  std::vector<BdmEntry> groupings;
  int trials = 10;
  std::uint64_t seed = 1;
};

struct BdiouBlock {
  double min_bdiou = 0.0;
  std::vector<std::size_t> top;
};

struct ExperimentConfig {
  DatasetPaths cohort_a;
  DatasetPaths cohort_b;
  modality::ModalityConfig modality;
  std::optional<BvdBlock> bvd;
  std::optional<BdmBlock> bdm;
  std::optional<BdiouBlock> bdiou;
  std::filesystem::path output_dir;
};

// Relative paths resolve against `base_dir`. Throws Error(kConfig).
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Both cohorts loaded and annotated.
struct Datasets {
  CohortDataset a;
  CohortDataset b;
  report::CohortLabels labels;
};

Datasets load_datasets(const DatasetPaths& a, const DatasetPaths& b,
                       const modality::ModalityConfig& cfg);

// Positions of pairs in `ds` whose type is Non-Uni (Bi/Multi images only).
std::vector<std::size_t> non_uni_positions(const CohortDataset& ds);

struct BdiouOutcome {
  std::size_t cf_candidates = 0;
  std::size_t af_candidates = 0;
  std::size_t sets_emitted = 0;
  std::vector<balancing::AssignedSet> assigned;
};

// Non-Uni prefilter, full set scan, greedy assignment.
BdiouOutcome bdiou_pipeline(const Datasets& ds, double min_bdiou);

struct RunOutputs {
  stats::BaselineStats baseline;
  std::vector<stats::ReportRow> rows;
  std::vector<std::filesystem::path> files;
};

// load -> annotate -> baseline -> strategies -> report. All files are staged in
// a temp directory and moved into place only after every step succeeded.
RunOutputs run_experiment(const ExperimentConfig& cfg);

}  // namespace lumibal::pipeline
