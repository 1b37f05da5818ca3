#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumibal/types.hpp"

namespace lumibal::synth {

struct Component {
  double weight = 1.0;
  double mu = 128.0;
  double sigma = 10.0;
};

// Shape of a k-component image: components spaced `separation` apart around
// the image center, which sits `center_offset` above the subject anchor.
struct MixtureShape {
  double center_offset = 0.0;
  double separation = 70.0;
  double sigma_lo = 8.0;
  double sigma_hi = 15.0;
};

struct CohortSpec {
  std::string label;
  int n_subjects = 100;
  int images_per_subject = 3;
  int pixels_per_image = 10000;
  double anchor_lo = 90.0;   // subject anchor brightness range
  double anchor_hi = 160.0;
  double drift_sd = 5.0;     // within-subject per-image center drift
  std::array<double, 3> component_probs{1.0, 0.0, 0.0};
  std::array<MixtureShape, 3> shapes{};
};

struct ScoreModel {
  double base = 0.8;
  double bvd_penalty = 0.0;
  double overexposure_penalty = 0.0;
  double noise_sd = 0.0;
};

struct SynthSpec {
  CohortSpec cohort_a;
  CohortSpec cohort_b;
  ScoreModel score;
  std::uint64_t seed = 1;

  // Throws Error(kConfig) on invalid fields.
  void validate() const;
};

SynthSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SynthSpec& spec);

// Samples n_pixels values from the mixture, rounds and clamps them to 0..255.
BrightnessDistribution gen_distribution(std::span<const Component> mixture, int n_pixels,
                                        std::uint64_t seed);

struct ImageTruth {
  std::string image_id;
  std::vector<Component> components;
};

struct SynthCohort {
  CohortDataset dataset;
  std::vector<ImageTruth> truth;
};

struct SynthResult {
  SynthCohort a;
  SynthCohort b;
};

// Subjects are generated in parallel from per-subject substreams; the output
// does not depend on thread count.
SynthResult gen_dataset(const SynthSpec& spec);

// Writes A.histograms.txt, A.pairs.csv, B.histograms.txt, B.pairs.csv and
// truth.json into `dir` (created if missing).
void write_synth(const SynthResult& result, const std::filesystem::path& dir);

}  // namespace lumibal::synth
