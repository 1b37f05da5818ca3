#include <doctest.h>

#include <omp.h>

#include <fstream>

#include "lumibal/annotate.hpp"
#include "lumibal/error.hpp"
#include "lumibal/io.hpp"
#include "lumibal/modality.hpp"
#include "lumibal/random.hpp"
#include "lumibal/stats.hpp"
#include "lumibal/synth.hpp"
#include "test_support.hpp"

using namespace lumibal;
using namespace lumibal::testing;
namespace sy = lumibal::synth;

namespace {

sy::SynthSpec small_spec(int images_per_subject) {
  sy::SynthSpec spec;
  spec.seed = 5;
  spec.cohort_a.n_subjects = 20;
  spec.cohort_a.images_per_subject = images_per_subject;
  spec.cohort_a.pixels_per_image = 2000;
  spec.cohort_a.component_probs = {0.5, 0.3, 0.2};
  spec.cohort_b = spec.cohort_a;
  spec.cohort_b.n_subjects = 15;
  spec.score = {0.8, 0.01, 0.2, 0.03};
  return spec;
}

}  // namespace

TEST_CASE("random streams are reproducible and in range") {
  rng::Stream a(99);
  rng::Stream b(99);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(a.below(7) < 7);
    b.below(7);
  }
  CHECK(rng::derive_seed(1, 2, 3) != rng::derive_seed(1, 3, 2));
  CHECK(rng::derive_seed(1, 0, 0) != rng::derive_seed(2, 0, 0));

  rng::Stream n(5);
  double sum = 0.0;
  double sq = 0.0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double x = n.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::abs(sq / count - 1.0) < 0.02);
}

TEST_CASE("gen_distribution examples") {
  const std::vector<sy::Component> point{{1.0, 128.0, 0.0}};
  const auto d = sy::gen_distribution(point, 5000, 1);
  CHECK(d.count(128) == 5000);
  CHECK(d.total() == 5000);

  const std::vector<sy::Component> mix{{1.0, 90.0, 12.0}, {1.0, 170.0, 9.0}};
  CHECK(sy::gen_distribution(mix, 10000, 7) == sy::gen_distribution(mix, 10000, 7));
  CHECK(sy::gen_distribution(mix, 10000, 7) != sy::gen_distribution(mix, 10000, 8));

  // Mass beyond the ends is clamped, not dropped.
  const std::vector<sy::Component> dark{{1.0, -50.0, 5.0}};
  CHECK(sy::gen_distribution(dark, 300, 1).count(0) == 300);
}

TEST_CASE("one-component mixtures classify as Uni") {
  const modality::ModalityConfig cfg;
  int uni = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<sy::Component> one{{1.0, 128.0, 15.0}};
    if (modality::classify(sy::gen_distribution(one, 10000, seed), cfg) == Modality::Uni) ++uni;
  }
  CHECK(uni >= 99);
}

TEST_CASE("pair counts follow images per subject") {
  auto r = sy::gen_dataset(small_spec(1));
  CHECK(r.a.dataset.pairs().empty());
  CHECK(r.a.dataset.images().size() == 20);

  r = sy::gen_dataset(small_spec(3));
  CHECK(r.a.dataset.pairs().size() == 3 * 20);
  CHECK(r.b.dataset.pairs().size() == 3 * 15);
  CHECK(r.a.truth.size() == r.a.dataset.images().size());
  CHECK(dataset_summary(r.a.dataset) == DatasetSummary{60, 20, 60});
}

TEST_CASE("constant score model leaves nothing to balance") {
  auto spec = small_spec(3);
  spec.score = {0.8, 0.0, 0.0, 0.0};
  const auto r = sy::gen_dataset(spec);
  for (const auto* c : {&r.a, &r.b}) {
    for (const auto& p : c->dataset.pairs()) CHECK(p.score == 0.8);
  }
  const auto base = stats::baseline(r.a.dataset, r.b.dataset);
  CHECK(base.dprime == 0.0);

  balancing::BalancedSubset s;
  s.strategy = balancing::Strategy::BdmSample;
  s.n = 5;
  for (int i = 0; i < 5; ++i) {
    s.cf_pair_ids.push_back(r.a.dataset.pairs()[static_cast<std::size_t>(i)].pair_id);
    s.af_pair_ids.push_back(r.b.dataset.pairs()[static_cast<std::size_t>(i)].pair_id);
  }
  const auto row = stats::evaluate_subset(std::vector{s}, r.a.dataset, r.b.dataset, base);
  CHECK(row.dprime == 0.0);
  CHECK(row.dprime_shift == 0.0);
  CHECK(row.shift_a == 0.0);
}

TEST_CASE("generation does not depend on thread count") {
  const auto spec = small_spec(4);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = sy::gen_dataset(spec);
  omp_set_num_threads(8);
  const auto eight = sy::gen_dataset(spec);
  omp_set_num_threads(saved);
  CHECK(one.a.dataset == eight.a.dataset);
  CHECK(one.b.dataset == eight.b.dataset);
}

TEST_CASE("written datasets pass ingestion and keep their content") {
  TempDir dir("synth");
  const auto r = sy::gen_dataset(small_spec(3));
  sy::write_synth(r, dir.path());
  for (const auto* c : {&r.a, &r.b}) {
    const std::string tag(to_string(c->dataset.cohort()));
    const auto back = load_dataset(dir / (tag + ".histograms.txt"), dir / (tag + ".pairs.csv"), c->dataset.cohort());
    CHECK(back == c->dataset);
  }
  std::ifstream truth(dir / "truth.json");
  const auto j = nlohmann::json::parse(truth);
  CHECK(j.at("A").size() == r.a.dataset.images().size());
  CHECK(j.at("A")[0].at("n_components").get<std::size_t>() == r.a.truth[0].components.size());
}

TEST_CASE("spec JSON round-trip and validation") {
  const auto spec = small_spec(3);
  const auto back = sy::spec_from_json(sy::spec_to_json(spec));
  CHECK(sy::spec_to_json(back) == sy::spec_to_json(spec));

  auto j = sy::spec_to_json(spec);
  j["cohorts"]["A"]["component_probs"] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(sy::spec_from_json(j), Error);
  j = sy::spec_to_json(spec);
  j["cohorts"]["B"]["pixels_per_image"] = 50;
  CHECK_THROWS_AS(sy::spec_from_json(j), Error);
  j = sy::spec_to_json(spec);
  j["cohorts"]["B"]["shapes"][1]["sigma"] = {0.0, 3.0};
  CHECK_THROWS_AS(sy::spec_from_json(j), Error);
  j = sy::spec_to_json(spec);
  j.erase("seed");
  CHECK_THROWS_AS(sy::spec_from_json(j), Error);
}

TEST_CASE("drift and BVD penalty give a positive baseline gap") {
  auto spec = small_spec(4);
  spec.cohort_a.n_subjects = 150;
  spec.cohort_b.n_subjects = 150;
  spec.cohort_a.drift_sd = 15.0;
  spec.cohort_b.drift_sd = 2.0;
  spec.score = {0.8, 0.004, 0.0, 0.02};
  const auto r = sy::gen_dataset(spec);
  const auto base = stats::baseline(r.a.dataset, r.b.dataset);
  CHECK(base.cohort_a.mean < base.cohort_b.mean);
  CHECK(base.dprime > 0.3);
}
