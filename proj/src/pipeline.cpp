#include "lumibal/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <system_error>

#include "lumibal/annotate.hpp"
#include "lumibal/error.hpp"
#include "lumibal/io.hpp"

namespace lumibal::pipeline {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::ranges::find(allowed, key) == allowed.end()) {
      throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

std::vector<std::size_t> positive_list(const json& j, const std::string& where) {
  auto v = j.get<std::vector<long long>>();
  if (v.empty()) throw Error(ErrorCode::kConfig, where + " must not be empty");
  std::vector<std::size_t> out;
  for (auto x : v) {
    if (x <= 0) throw Error(ErrorCode::kConfig, where + " values must be positive");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

DatasetPaths paths_from_json(const json& j, const fs::path& base, const std::string& name) {
  reject_unknown(j, {"images", "pairs", "label"}, "cohorts." + name);
  DatasetPaths p;
  p.images = base / j.at("images").get<std::string>();
  p.pairs = base / j.at("pairs").get<std::string>();
  p.label = j.value("label", name);
  return p;
}

void stage(const fs::path& dir, const std::string& name, std::string_view content,
           std::vector<fs::path>& staged) {
  write_file_atomic(dir / name, content);
  staged.push_back(name);
}

std::string subset_text(std::span<const balancing::BalancedSubset> trials) {
  std::ostringstream out;
  balancing::write_subsets(out, trials);
  return out.str();
}

std::string slug(std::string s) {
  for (auto& c : s) {
    if (c == ',') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  ExperimentConfig cfg;
  try {
    reject_unknown(j, {"cohorts", "modality", "strategies", "output_dir"}, "config");
    const auto& cohorts = j.at("cohorts");
    reject_unknown(cohorts, {"A", "B"}, "cohorts");
    cfg.cohort_a = paths_from_json(cohorts.at("A"), base_dir, "A");
    cfg.cohort_b = paths_from_json(cohorts.at("B"), base_dir, "B");
    if (j.contains("modality")) {
      const auto& m = j["modality"];
      reject_unknown(m, {"sw", "rt", "prominence"}, "modality");
      cfg.modality.sw = m.value("sw", cfg.modality.sw);
      cfg.modality.rt = m.value("rt", cfg.modality.rt);
      cfg.modality.prominence = m.value("prominence", cfg.modality.prominence);
    }
    cfg.modality.validate();
    const auto strategies = j.value("strategies", json::object());
    reject_unknown(strategies, {"bvd", "bdm", "bdiou"}, "strategies");
    if (strategies.contains("bvd")) {
      const auto& b = strategies["bvd"];
      reject_unknown(b, {"top"}, "strategies.bvd");
      cfg.bvd = BvdBlock{positive_list(b.at("top"), "strategies.bvd.top")};
    }
    if (strategies.contains("bdm")) {
      const auto& b = strategies["bdm"];
      reject_unknown(b, {"groupings", "trials", "seed"}, "strategies.bdm");
      BdmBlock block;
      block.trials = b.value("trials", block.trials);
      block.seed = b.value("seed", block.seed);
      if (block.trials < 1) throw Error(ErrorCode::kConfig, "strategies.bdm.trials must be >= 1");
      for (const auto& g : b.at("groupings")) {
        reject_unknown(g, {"types", "n"}, "strategies.bdm.groupings[]");
        const auto n = g.at("n").get<long long>();
        if (n <= 0) throw Error(ErrorCode::kConfig, "strategies.bdm.groupings[].n must be positive");
        block.groupings.push_back(
            {balancing::BdmGrouping::parse(g.at("types").get<std::string>()), static_cast<std::size_t>(n)});
      }
      if (block.groupings.empty()) throw Error(ErrorCode::kConfig, "strategies.bdm.groupings must not be empty");
      cfg.bdm = std::move(block);
    }
    if (strategies.contains("bdiou")) {
      const auto& b = strategies["bdiou"];
      reject_unknown(b, {"min_bdiou", "top"}, "strategies.bdiou");
      cfg.bdiou = BdiouBlock{b.value("min_bdiou", 0.0), positive_list(b.at("top"), "strategies.bdiou.top")};
    }
    cfg.output_dir = base_dir / j.value("output_dir", std::string("out"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  const auto text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

Datasets load_datasets(const DatasetPaths& a, const DatasetPaths& b,
                       const modality::ModalityConfig& cfg) {
  for (const auto* p : {&a.images, &a.pairs, &b.images, &b.pairs}) {
    if (!fs::exists(*p)) throw Error(ErrorCode::kIo, "missing input file '" + p->string() + "'");
  }
  Datasets ds{load_dataset(a.images, a.pairs, Cohort::A), load_dataset(b.images, b.pairs, Cohort::B),
              {a.label, b.label}};
  annotate_dataset(ds.a, cfg);
  annotate_dataset(ds.b, cfg);
  return ds;
}

std::vector<std::size_t> non_uni_positions(const CohortDataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.pairs().size(); ++i) {
    const auto& t = ds.pairs()[i].pair_type;
    if (!t) throw Error(ErrorCode::kIntegrity, "pair '" + ds.pairs()[i].pair_id + "' has no pair type");
    if (modality::is_non_uni(*t)) out.push_back(i);
  }
  return out;
}

BdiouOutcome bdiou_pipeline(const Datasets& ds, double min_bdiou) {
  const auto cf_pos = non_uni_positions(ds.a);
  const auto af_pos = non_uni_positions(ds.b);
  BdiouOutcome out;
  out.cf_candidates = cf_pos.size();
  out.af_candidates = af_pos.size();
  const distsim::DatasetScan scan(ds.a, cf_pos, ds.b, af_pos);
  auto scores = distsim::collect_set_scores(scan.input(), min_bdiou);
  out.sets_emitted = scores.size();
  std::vector<std::string> cf_ids;
  std::vector<std::string> af_ids;
  for (auto p : cf_pos) cf_ids.push_back(ds.a.pairs()[p].pair_id);
  for (auto p : af_pos) af_ids.push_back(ds.b.pairs()[p].pair_id);
  out.assigned = balancing::bdiou_assign(std::move(scores), cf_ids, af_ids);
  return out;
}

RunOutputs run_experiment(const ExperimentConfig& cfg) {
  const auto ds = load_datasets(cfg.cohort_a, cfg.cohort_b, cfg.modality);
  RunOutputs out;
  out.baseline = stats::baseline(ds.a, ds.b);

  fs::path staging = cfg.output_dir;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging / "subsets");
  std::vector<fs::path> staged;

  try {
    if (cfg.bvd) {
      const auto matched = balancing::bvd_match(ds.a.pairs(), ds.b.pairs());
      for (auto n : cfg.bvd->top) {
        const auto subset = balancing::take_top(matched, n);
        out.rows.push_back(stats::evaluate_subset({&subset, 1}, ds.a, ds.b, out.baseline));
        stage(staging, "subsets/bvd_top_" + std::to_string(n) + ".txt", subset_text({&subset, 1}), staged);
      }
    }
    if (cfg.bdm) {
      for (const auto& entry : cfg.bdm->groupings) {
        const auto cf = balancing::bdm_filter(ds.a.pairs(), entry.grouping);
        const auto af = balancing::bdm_filter(ds.b.pairs(), entry.grouping);
        const auto trials = balancing::bdm_sample(cf, af, entry.n, cfg.bdm->trials, cfg.bdm->seed,
                                                  entry.grouping.label());
        out.rows.push_back(stats::evaluate_subset(trials, ds.a, ds.b, out.baseline));
        stage(staging,
              "subsets/bdm_" + slug(entry.grouping.label()) + "_" + std::to_string(entry.n) + ".txt",
              subset_text(trials), staged);
      }
    }
    if (cfg.bdiou) {
      const auto outcome = bdiou_pipeline(ds, cfg.bdiou->min_bdiou);
      std::ostringstream assigned;
      assigned << "cf_pair_id,af_pair_id,bdiou\n";
      for (const auto& s : outcome.assigned) {
        assigned << s.cf_pair_id << ',' << s.af_pair_id << ',' << format_fixed(s.bdiou, 6) << '\n';
      }
      stage(staging, "bdiou_assigned.csv", assigned.str(), staged);
      for (auto n : cfg.bdiou->top) {
        const auto subset = balancing::bdiou_top(outcome.assigned, n);
        out.rows.push_back(stats::evaluate_subset({&subset, 1}, ds.a, ds.b, out.baseline));
        stage(staging, "subsets/bdiou_top_" + std::to_string(n) + ".txt", subset_text({&subset, 1}), staged);
      }
    }
    stage(staging, "report.csv", report::to_csv(out.baseline, out.rows, ds.labels), staged);
    stage(staging, "report.json", report::to_json(out.baseline, out.rows, ds.labels), staged);
    stage(staging, "plot_data.csv", report::plot_data(out.rows), staged);

    fs::create_directories(cfg.output_dir / "subsets");
    for (const auto& rel : staged) {
      fs::rename(staging / rel, cfg.output_dir / rel);
      out.files.push_back(cfg.output_dir / rel);
    }
    fs::remove_all(staging, ec);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  return out;
}

}  // namespace lumibal::pipeline
