// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lumibal/annotate.hpp"
#include "lumibal/distsim.hpp"
#include "lumibal/reference.hpp"
#include "lumibal/synth.hpp"
#include "test_support.hpp"

using namespace lumibal;

namespace {

struct ScanFixture {
  std::vector<BrightnessDistribution> cf_img, af_img;
  std::vector<distsim::PairRef> cf_pairs, af_pairs;

  explicit ScanFixture(std::uint32_t n) {
    std::mt19937_64 rng(42);
    for (std::uint32_t i = 0; i < 2 * n; ++i) cf_img.push_back(testing::random_dist(rng, 50000));
    for (std::uint32_t i = 0; i < 2 * n; ++i) af_img.push_back(testing::random_dist(rng, 50000));
    for (std::uint32_t i = 0; i < n; ++i) {
      cf_pairs.push_back({2 * i, 2 * i + 1});
      af_pairs.push_back({2 * i, 2 * i + 1});
    }
  }
};

void BM_ScanReference(benchmark::State& state) {
  const ScanFixture f(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::all_set_scores(f.cf_img, f.cf_pairs, f.af_img, f.af_pairs, 0.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_ScanParallel(benchmark::State& state) {
  const ScanFixture f(static_cast<std::uint32_t>(state.range(0)));
  const distsim::DistributionTable tc{std::span<const BrightnessDistribution>(f.cf_img)};
  const distsim::DistributionTable ta{std::span<const BrightnessDistribution>(f.af_img)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(distsim::collect_set_scores({&tc, f.cf_pairs, &ta, f.af_pairs}, 0.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

CohortDataset annotate_fixture() {
  std::mt19937_64 rng(7);
  std::vector<ImageRecord> images;
  for (int i = 0; i < 20000; ++i) {
    const double mu = std::uniform_real_distribution<double>(40, 200)(rng);
    const std::vector<synth::Component> mix{{1.0, mu, 10.0}, {0.5, mu + 50, 8.0}};
    images.push_back(testing::image("img" + std::to_string(i), "s" + std::to_string(i / 4), Cohort::A,
                                    synth::gen_distribution(mix, 10000, rng())));
  }
  CohortDataset ds(Cohort::A);
  ds.set_images(std::move(images));
  return ds;
}

void BM_AnnotateReference(benchmark::State& state) {
  auto ds = annotate_fixture();
  for (auto _ : state) reference::annotate_dataset(ds, {});
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.images().size()));
}

void BM_AnnotateParallel(benchmark::State& state) {
  auto ds = annotate_fixture();
  for (auto _ : state) annotate_dataset(ds, {});
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.images().size()));
}

}  // namespace

BENCHMARK(BM_ScanReference)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanParallel)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnnotateReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnnotateParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
