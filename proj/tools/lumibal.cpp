// lumibal: brightness-based balancing of mated face-image pairs.

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lumibal/annotate.hpp"
#include "lumibal/balancing.hpp"
#include "lumibal/distsim.hpp"
#include "lumibal/error.hpp"
#include "lumibal/extract.hpp"
#include "lumibal/io.hpp"
#include "lumibal/pipeline.hpp"
#include "lumibal/report.hpp"
#include "lumibal/stats.hpp"
#include "lumibal/synth.hpp"

namespace {

using namespace lumibal;
namespace fs = std::filesystem;

struct DatasetOptions {
  pipeline::DatasetPaths a{{}, {}, "A"};
  pipeline::DatasetPaths b{{}, {}, "B"};
  modality::ModalityConfig modality;
};

void add_modality_options(CLI::App* cmd, modality::ModalityConfig& m) {
  cmd->add_option("--sw", m.sw, "Smoothing half-window in bins")->capture_default_str();
  cmd->add_option("--rt", m.rt, "Relative peak-height threshold")->capture_default_str();
  cmd->add_option("--prominence", m.prominence, "Minimum relative peak prominence")
      ->capture_default_str();
}

void add_dataset_options(CLI::App* cmd, DatasetOptions& o) {
  cmd->add_option("--a-images", o.a.images, "Cohort A histogram records")->required();
  cmd->add_option("--a-pairs", o.a.pairs, "Cohort A pair scores")->required();
  cmd->add_option("--b-images", o.b.images, "Cohort B histogram records")->required();
  cmd->add_option("--b-pairs", o.b.pairs, "Cohort B pair scores")->required();
  cmd->add_option("--a-label", o.a.label, "Display label for cohort A")->capture_default_str();
  cmd->add_option("--b-label", o.b.label, "Display label for cohort B")->capture_default_str();
  add_modality_options(cmd, o.modality);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(out_path, content);
  }
}

int resolve_threads(int flag) {
  if (const char* env = std::getenv("LUMIBAL_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw Error(ErrorCode::kConfig, "LUMIBAL_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return flag > 0 ? flag : omp_get_num_procs();
}

std::string subsets_text(std::span<const balancing::BalancedSubset> s) {
  std::ostringstream out;
  balancing::write_subsets(out, s);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brightness-based balancing of mated face-image pairs across two cohorts"};
  app.require_subcommand(1);
  app.allow_extras(false);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: logical cores; LUMIBAL_THREADS overrides)");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Histogram records from crop/mask image pairs");
  fs::path extract_dir;
  std::string extract_cohort = "A";
  std::string extract_out;
  extract_cmd->add_option("--dir", extract_dir, "Directory of <subject>__<tag>.crop/.mask images")->required();
  extract_cmd->add_option("--cohort", extract_cohort, "Cohort of every record")
      ->check(CLI::IsMember({"A", "B"}))->capture_default_str();
  extract_cmd->add_option("--out", extract_out, "Output histogram records (default: stdout)");

  // modality
  auto* modality_cmd = app.add_subcommand("modality", "Annotate histogram records with bv and modality");
  fs::path modality_in;
  std::string modality_out;
  modality::ModalityConfig modality_cfg;
  modality_cmd->add_option("--in", modality_in, "Histogram records to annotate")->required();
  modality_cmd->add_option("--out", modality_out, "Output file (default: rewrite --in)");
  add_modality_options(modality_cmd, modality_cfg);

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "Unbalanced cohort statistics and d'");
  DatasetOptions baseline_opts;
  bool baseline_json = false;
  add_dataset_options(baseline_cmd, baseline_opts);
  baseline_cmd->add_flag("--json", baseline_json, "Structured output");

  // balance
  auto* balance_cmd = app.add_subcommand("balance", "Build balanced subsets");
  balance_cmd->require_subcommand(1);
  DatasetOptions balance_opts;
  std::string balance_out;
  auto* bvd_cmd = balance_cmd->add_subcommand("bvd", "Exact-BVD matching, top N by ascending BVD");
  std::size_t bvd_top = 0;
  add_dataset_options(bvd_cmd, balance_opts);
  bvd_cmd->add_option("--top", bvd_top, "Pairs per cohort")->required()->check(CLI::PositiveNumber);
  bvd_cmd->add_option("--out", balance_out, "Subset file (default: stdout)");

  auto* bdm_cmd = balance_cmd->add_subcommand("bdm", "Pair-type filtering with shuffled trials");
  std::string bdm_grouping = "bb,mm,bm";
  std::size_t bdm_n = 0;
  int bdm_trials = 10;
  std::uint64_t bdm_seed = 1;
  add_dataset_options(bdm_cmd, balance_opts);
  bdm_cmd->add_option("--grouping", bdm_grouping, "Allowed pair types, e.g. mm,bm")->capture_default_str();
  bdm_cmd->add_option("--n", bdm_n, "Pairs per cohort")->required()->check(CLI::PositiveNumber);
  bdm_cmd->add_option("--trials", bdm_trials, "Shuffled trials")->capture_default_str()->check(CLI::PositiveNumber);
  bdm_cmd->add_option("--seed", bdm_seed, "Master seed")->capture_default_str();
  bdm_cmd->add_option("--out", balance_out, "Subset file (default: stdout)");

  auto* bdiou_bal_cmd = balance_cmd->add_subcommand("bdiou", "Greedy unique BD-IoU assignment, top N");
  std::size_t bdiou_top = 0;
  double bdiou_min = 0.0;
  add_dataset_options(bdiou_bal_cmd, balance_opts);
  bdiou_bal_cmd->add_option("--top", bdiou_top, "Pairs per cohort")->required()->check(CLI::PositiveNumber);
  bdiou_bal_cmd->add_option("--min-bdiou", bdiou_min, "Drop sets below this BD-IoU")->capture_default_str();
  bdiou_bal_cmd->add_option("--out", balance_out, "Subset file (default: stdout)");

  // bdiou scan
  auto* bdiou_cmd = app.add_subcommand("bdiou", "BD-IoU set scoring");
  bdiou_cmd->require_subcommand(1);
  auto* scan_cmd = bdiou_cmd->add_subcommand("scan", "Score every Non-Uni (A pair, B pair) set");
  DatasetOptions scan_opts;
  double scan_min = 0.0;
  std::string scan_out;
  add_dataset_options(scan_cmd, scan_opts);
  scan_cmd->add_option("--min", scan_min, "Emit sets with BD-IoU >= this")->capture_default_str();
  scan_cmd->add_option("--out", scan_out, "Output file (default: stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Evaluate subset files against the baseline");
  DatasetOptions report_opts;
  std::vector<fs::path> report_subsets;
  std::string report_format = "csv";
  bool report_plot = false;
  std::string report_out;
  add_dataset_options(report_cmd, report_opts);
  report_cmd->add_option("--subset", report_subsets, "Subset file (repeatable)")->required();
  report_cmd->add_option("--format", report_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  report_cmd->add_flag("--plot-data", report_plot, "Emit (factor mean, d' shift) series instead");
  report_cmd->add_option("--out", report_out, "Output file (default: stdout)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic two-cohort dataset");
  fs::path synth_spec;
  fs::path synth_out;
  synth_cmd->add_option("--spec", synth_spec, "SynthSpec JSON")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Full experiment from a config file");
  fs::path run_config;
  run_cmd->add_option("--config", run_config, "Experiment config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    omp_set_num_threads(resolve_threads(threads));

    if (*extract_cmd) {
      const auto result = extract::extract_directory(extract_dir, *parse_cohort(extract_cohort));
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& e : result.errors) std::cerr << "error: " << e << '\n';
      std::ostringstream out;
      write_images(out, result.records);
      emit(extract_out, out.str());
      return result.errors.empty() ? 0 : 1;
    }

    if (*modality_cmd) {
      auto records = [&] {
        std::ifstream in(modality_in);
        if (!in) throw Error(ErrorCode::kIo, "cannot open '" + modality_in.string() + "'");
        return read_images_any(in, modality_in.string());
      }();
      // Group by cohort only to reuse the dataset annotator; output keeps file order.
      CohortDataset scratch_a(Cohort::A);
      CohortDataset scratch_b(Cohort::B);
      std::vector<ImageRecord> a;
      std::vector<ImageRecord> b;
      for (const auto& r : records) (r.cohort == Cohort::A ? a : b).push_back(r);
      scratch_a.set_images(std::move(a));
      scratch_b.set_images(std::move(b));
      annotate_dataset(scratch_a, modality_cfg);
      annotate_dataset(scratch_b, modality_cfg);
      for (auto& r : records) {
        const auto& ds = r.cohort == Cohort::A ? scratch_a : scratch_b;
        const auto* done = ds.find_image(r.image_id);
        r.bv = done->bv;
        r.modality = done->modality;
      }
      std::ostringstream out;
      write_images(out, records, true);
      write_file_atomic(modality_out.empty() ? modality_in : fs::path(modality_out), out.str());
      return 0;
    }

    if (*baseline_cmd) {
      const auto ds = pipeline::load_datasets(baseline_opts.a, baseline_opts.b, baseline_opts.modality);
      const auto base = stats::baseline(ds.a, ds.b);
      if (baseline_json) {
        std::cout << report::to_json(base, {}, ds.labels);
      } else {
        std::cout << report::to_csv(base, {}, ds.labels);
      }
      return 0;
    }

    if (*balance_cmd) {
      const auto ds = pipeline::load_datasets(balance_opts.a, balance_opts.b, balance_opts.modality);
      std::vector<balancing::BalancedSubset> subsets;
      if (*bvd_cmd) {
        const auto matched = balancing::bvd_match(ds.a.pairs(), ds.b.pairs());
        subsets.push_back(balancing::take_top(matched, bvd_top));
      } else if (*bdm_cmd) {
        const auto grouping = balancing::BdmGrouping::parse(bdm_grouping);
        const auto cf = balancing::bdm_filter(ds.a.pairs(), grouping);
        const auto af = balancing::bdm_filter(ds.b.pairs(), grouping);
        subsets = balancing::bdm_sample(cf, af, bdm_n, bdm_trials, bdm_seed, grouping.label());
      } else {
        const auto outcome = pipeline::bdiou_pipeline(ds, bdiou_min);
        subsets.push_back(balancing::bdiou_top(outcome.assigned, bdiou_top));
      }
      emit(balance_out, subsets_text(subsets));
      return 0;
    }

    if (*scan_cmd) {
      const auto ds = pipeline::load_datasets(scan_opts.a, scan_opts.b, scan_opts.modality);
      const auto cf_pos = pipeline::non_uni_positions(ds.a);
      const auto af_pos = pipeline::non_uni_positions(ds.b);
      const distsim::DatasetScan scan(ds.a, cf_pos, ds.b, af_pos);
      std::ostringstream out;
      out << "cf_pair_id,af_pair_id,bdiou,assignment\n";
      distsim::scan_set_scores(scan.input(), scan_min, [&](std::span<const distsim::SetScore> block) {
        for (const auto& s : block) {
          out << ds.a.pairs()[cf_pos[s.cf_index]].pair_id << ',' << ds.b.pairs()[af_pos[s.af_index]].pair_id
              << ',' << format_fixed(s.bdiou, 6) << ',' << distsim::to_string(s.assignment) << '\n';
        }
      });
      emit(scan_out, out.str());
      return 0;
    }

    if (*report_cmd) {
      const auto ds = pipeline::load_datasets(report_opts.a, report_opts.b, report_opts.modality);
      const auto base = stats::baseline(ds.a, ds.b);
      std::vector<stats::ReportRow> rows;
      for (const auto& path : report_subsets) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
        const auto trials = balancing::read_subsets(in, path.string());
        rows.push_back(stats::evaluate_subset(trials, ds.a, ds.b, base));
      }
      if (report_plot) {
        emit(report_out, report::plot_data(rows));
      } else if (report_format == "json") {
        emit(report_out, report::to_json(base, rows, ds.labels));
      } else {
        emit(report_out, report::to_csv(base, rows, ds.labels));
      }
      return 0;
    }

    if (*synth_cmd) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(synth_spec));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfig, synth_spec.string() + ": " + e.what());
      }
      synth::write_synth(synth::gen_dataset(synth::spec_from_json(j)), synth_out);
      return 0;
    }

    if (*run_cmd) {
      const auto outputs = pipeline::run_experiment(pipeline::load_config(run_config));
      for (const auto& f : outputs.files) std::cerr << "wrote " << f.string() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_token(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: E_INTERNAL: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
