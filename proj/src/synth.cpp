#include "lumibal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "lumibal/brightness.hpp"
#include "lumibal/error.hpp"
#include "lumibal/io.hpp"
#include "lumibal/random.hpp"

namespace lumibal::synth {
namespace {

using nlohmann::json;

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfig, "synth spec: " + what);
}

void validate_cohort(const CohortSpec& c, const std::string& name) {
  check(c.n_subjects >= 1, name + ".n_subjects must be >= 1");
  check(c.images_per_subject >= 1, name + ".images_per_subject must be >= 1");
  check(c.pixels_per_image >= 100, name + ".pixels_per_image must be >= 100");
  check(c.anchor_lo <= c.anchor_hi, name + ".anchor range is inverted");
  check(c.drift_sd >= 0.0, name + ".drift_sd must be >= 0");
  double sum = 0.0;
  for (double p : c.component_probs) {
    check(p >= 0.0, name + ".component_probs must be non-negative");
    sum += p;
  }
  check(std::abs(sum - 1.0) < 1e-9, name + ".component_probs must sum to 1");
  for (const auto& s : c.shapes) {
    check(s.sigma_lo > 0.0 && s.sigma_hi >= s.sigma_lo, name + ".shapes sigma range must be positive");
  }
}

CohortSpec cohort_from_json(const json& j, const std::string& name) {
  CohortSpec c;
  c.label = j.value("label", name);
  c.n_subjects = j.at("n_subjects").get<int>();
  c.images_per_subject = j.at("images_per_subject").get<int>();
  c.pixels_per_image = j.value("pixels_per_image", c.pixels_per_image);
  const auto anchor = j.at("anchor").get<std::array<double, 2>>();
  c.anchor_lo = anchor[0];
  c.anchor_hi = anchor[1];
  c.drift_sd = j.at("drift_sd").get<double>();
  c.component_probs = j.at("component_probs").get<std::array<double, 3>>();
  const auto& shapes = j.at("shapes");
  check(shapes.is_array() && shapes.size() == 3, name + ".shapes needs 3 entries");
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& s = shapes[k];
    c.shapes[k].center_offset = s.value("center_offset", 0.0);
    c.shapes[k].separation = s.value("separation", 0.0);
    const auto sigma = s.at("sigma").get<std::array<double, 2>>();
    c.shapes[k].sigma_lo = sigma[0];
    c.shapes[k].sigma_hi = sigma[1];
  }
  return c;
}

json cohort_to_json(const CohortSpec& c) {
  json shapes = json::array();
  for (const auto& s : c.shapes) {
    shapes.push_back({{"center_offset", s.center_offset},
                      {"separation", s.separation},
                      {"sigma", {s.sigma_lo, s.sigma_hi}}});
  }
  return {{"label", c.label},
          {"n_subjects", c.n_subjects},
          {"images_per_subject", c.images_per_subject},
          {"pixels_per_image", c.pixels_per_image},
          {"anchor", {c.anchor_lo, c.anchor_hi}},
          {"drift_sd", c.drift_sd},
          {"component_probs", c.component_probs},
          {"shapes", shapes}};
}

struct SubjectOutput {
  std::vector<ImageRecord> images;
  std::vector<ImageTruth> truth;
  std::vector<MatedPair> pairs;
};

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

SubjectOutput gen_subject(const CohortSpec& c, Cohort cohort, int subject, const ScoreModel& model,
                          std::uint64_t master_seed) {
  rng::Stream stream(rng::derive_seed(master_seed, static_cast<std::uint64_t>(cohort) + 1,
                                      static_cast<std::uint64_t>(subject)));
  const std::string cohort_tag(to_string(cohort));
  const std::string subject_id = cohort_tag + "_s" + padded(subject, 5);

  SubjectOutput out;
  const double anchor = stream.uniform(c.anchor_lo, c.anchor_hi);
  std::vector<double> oef;
  for (int i = 0; i < c.images_per_subject; ++i) {
    const double u = stream.uniform();
    int k = 0;
    double acc = c.component_probs[0];
    while (k < 2 && u >= acc) acc += c.component_probs[++k];
    const auto& shape = c.shapes[static_cast<std::size_t>(k)];
    const double center = anchor + shape.center_offset + c.drift_sd * stream.normal();
    const double sigma = stream.uniform(shape.sigma_lo, shape.sigma_hi);
    const int n_comp = k + 1;
    std::vector<Component> mixture;
    for (int m = 0; m < n_comp; ++m) {
      const double offset = (m - (n_comp - 1) / 2.0) * shape.separation;
      mixture.push_back({1.0 / n_comp, center + offset, sigma});
    }
    ImageRecord rec;
    rec.image_id = subject_id + "_i" + std::to_string(i);
    rec.subject_id = subject_id;
    rec.cohort = cohort;
    rec.dist = gen_distribution(mixture, c.pixels_per_image, stream.next());
    rec.bv = brightness::brightness_value(rec.dist);
    oef.push_back(brightness::overexposure_fraction(rec.dist));
    out.truth.push_back({rec.image_id, std::move(mixture)});
    out.images.push_back(std::move(rec));
  }
  for (int x = 0; x < c.images_per_subject; ++x) {
    for (int y = x + 1; y < c.images_per_subject; ++y) {
      MatedPair p;
      p.pair_id = subject_id + "_p" + std::to_string(x) + "_" + std::to_string(y);
      p.img_x = out.images[x].image_id;
      p.img_y = out.images[y].image_id;
      const double diff = brightness::bvd(*out.images[x].bv, *out.images[y].bv).value();
      const double raw = model.base - model.bvd_penalty * diff -
                         model.overexposure_penalty * (oef[x] + oef[y]) +
                         model.noise_sd * stream.normal();
      p.score = std::clamp(raw, -1.0, 1.0);
      out.pairs.push_back(std::move(p));
    }
  }
  // bv is a derived field; datasets leave generation with it unset like any
  // freshly loaded file.
  for (auto& img : out.images) img.bv.reset();
  return out;
}

SynthCohort gen_cohort(const CohortSpec& c, Cohort cohort, const ScoreModel& model,
                       std::uint64_t seed) {
  std::vector<SubjectOutput> subjects(static_cast<std::size_t>(c.n_subjects));
#pragma omp parallel for schedule(dynamic, 8)
  for (int s = 0; s < c.n_subjects; ++s) subjects[s] = gen_subject(c, cohort, s, model, seed);

  SynthCohort out;
  std::vector<ImageRecord> images;
  std::vector<MatedPair> pairs;
  for (auto& s : subjects) {
    std::ranges::move(s.images, std::back_inserter(images));
    std::ranges::move(s.pairs, std::back_inserter(pairs));
    std::ranges::move(s.truth, std::back_inserter(out.truth));
  }
  out.dataset = CohortDataset(cohort);
  out.dataset.set_images(std::move(images));
  out.dataset.set_pairs(std::move(pairs));
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  validate_cohort(cohort_a, "A");
  validate_cohort(cohort_b, "B");
  check(score.noise_sd >= 0.0, "score_model.noise_sd must be >= 0");
}

SynthSpec spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("score_model");
    spec.score.base = m.at("base").get<double>();
    spec.score.bvd_penalty = m.value("bvd_penalty", 0.0);
    spec.score.overexposure_penalty = m.value("overexposure_penalty", 0.0);
    spec.score.noise_sd = m.value("noise_sd", 0.0);
    spec.cohort_a = cohort_from_json(j.at("cohorts").at("A"), "A");
    spec.cohort_b = cohort_from_json(j.at("cohorts").at("B"), "B");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json spec_to_json(const SynthSpec& spec) {
  return {{"seed", spec.seed},
          {"score_model",
           {{"base", spec.score.base},
            {"bvd_penalty", spec.score.bvd_penalty},
            {"overexposure_penalty", spec.score.overexposure_penalty},
            {"noise_sd", spec.score.noise_sd}}},
          {"cohorts", {{"A", cohort_to_json(spec.cohort_a)}, {"B", cohort_to_json(spec.cohort_b)}}}};
}

BrightnessDistribution gen_distribution(std::span<const Component> mixture, int n_pixels,
                                        std::uint64_t seed) {
  if (mixture.empty() || n_pixels <= 0) throw Error(ErrorCode::kConfig, "empty mixture");
  double total_weight = 0.0;
  for (const auto& c : mixture) total_weight += c.weight;
  rng::Stream stream(seed);
  BrightnessDistribution::Counts counts{};
  for (int i = 0; i < n_pixels; ++i) {
    const double u = stream.uniform() * total_weight;
    std::size_t k = 0;
    double acc = mixture[0].weight;
    while (k + 1 < mixture.size() && u >= acc) acc += mixture[++k].weight;
    const auto& c = mixture[k];
    const double x = c.sigma > 0.0 ? stream.normal(c.mu, c.sigma) : c.mu;
    const double v = std::clamp(std::round(x), 0.0, 255.0);
    ++counts[static_cast<std::size_t>(v)];
  }
  return BrightnessDistribution(counts);
}

SynthResult gen_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthResult out;
  out.a = gen_cohort(spec.cohort_a, Cohort::A, spec.score, spec.seed);
  out.b = gen_cohort(spec.cohort_b, Cohort::B, spec.score, spec.seed);
  return out;
}

void write_synth(const SynthResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json truth;
  for (const auto* c : {&result.a, &result.b}) {
    const std::string tag(to_string(c->dataset.cohort()));
    std::ostringstream images;
    write_images(images, c->dataset.images());
    write_file_atomic(dir / (tag + ".histograms.txt"), images.str());
    std::ostringstream pairs;
    write_pairs(pairs, c->dataset.pairs());
    write_file_atomic(dir / (tag + ".pairs.csv"), pairs.str());

    auto& list = truth[tag] = nlohmann::ordered_json::array();
    for (const auto& t : c->truth) {
      nlohmann::ordered_json comps = nlohmann::ordered_json::array();
      for (const auto& comp : t.components) comps.push_back({comp.weight, comp.mu, comp.sigma});
      list.push_back({{"image_id", t.image_id}, {"n_components", t.components.size()}, {"components", comps}});
    }
  }
  write_file_atomic(dir / "truth.json", truth.dump(1) + "\n");
}

}  // namespace lumibal::synth
