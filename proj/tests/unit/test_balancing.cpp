#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lumibal/balancing.hpp"
#include "lumibal/error.hpp"
#include "lumibal/reference.hpp"
#include "test_support.hpp"

using namespace lumibal;
using namespace lumibal::testing;
namespace bl = lumibal::balancing;

namespace {

MatedPair with_bvd(std::string id, double bvd) {
  MatedPair p;
  p.pair_id = std::move(id);
  p.bvd = HalfStep::from_halves(static_cast<std::int32_t>(bvd * 2));
  return p;
}

MatedPair with_type(std::string id, PairType t) {
  MatedPair p;
  p.pair_id = std::move(id);
  p.pair_type = t;
  return p;
}

// Maximum bipartite matching by augmenting paths (edges: equal bvd).
std::size_t max_matching(const std::vector<MatedPair>& cf, const std::vector<MatedPair>& af) {
  std::vector<int> owner(af.size(), -1);
  std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i, std::vector<bool>& seen) {
    for (std::size_t j = 0; j < af.size(); ++j) {
      if (seen[j] || *af[j].bvd != *cf[i].bvd) continue;
      seen[j] = true;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
        owner[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  std::size_t size = 0;
  for (std::size_t i = 0; i < cf.size(); ++i) {
    std::vector<bool> seen(af.size(), false);
    if (augment(i, seen)) ++size;
  }
  return size;
}

std::vector<MatedPair> random_bvd_pairs(std::mt19937& rng, const std::string& prefix, std::size_t n) {
  std::vector<MatedPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(with_bvd(prefix + std::to_string(rng() % 1000), (rng() % 8) * 0.5));
  // Ids must stay unique within a side.
  std::ranges::sort(out, {}, &MatedPair::pair_id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].pair_id += "_" + std::to_string(i);
  std::ranges::shuffle(out, rng);
  return out;
}

distsim::SetScore score(std::uint32_t cf, std::uint32_t af, double v) {
  return {cf, af, v, distsim::Assignment::Straight};
}

}  // namespace

TEST_CASE("bvd_match examples") {
  const std::vector<MatedPair> cf{with_bvd("c0", 0.0), with_bvd("c1", 0.5), with_bvd("c2", 3.0)};
  const std::vector<MatedPair> af{with_bvd("a0", 0.5), with_bvd("a1", 0.5), with_bvd("a2", 0.0)};
  const auto m = bl::bvd_match(cf, af);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == bl::MatchedEntry{"c0", "a2", HalfStep{}});
  CHECK(m[1] == bl::MatchedEntry{"c1", "a0", HalfStep::from_halves(1)});
  CHECK(max_matching(cf, af) == 2);

  CHECK(bl::bvd_match(std::vector{with_bvd("c", 2.0)}, std::vector{with_bvd("a", 1.0)}).empty());
  CHECK(bl::bvd_match({}, {}).empty());
  CHECK_THROWS_AS(bl::bvd_match(std::vector{MatedPair{}}, {}), Error);
}

TEST_CASE("bvd_match ties follow pair id order") {
  const std::vector<MatedPair> cf{with_bvd("c_b", 1.0), with_bvd("c_a", 1.0)};
  const std::vector<MatedPair> af{with_bvd("a_z", 1.0), with_bvd("a_y", 1.0), with_bvd("a_x", 1.0)};
  const auto m = bl::bvd_match(cf, af);
  REQUIRE(m.size() == 2);
  CHECK(m[0].cf_pair_id == "c_a");
  CHECK(m[0].af_pair_id == "a_x");
  CHECK(m[1].cf_pair_id == "c_b");
  CHECK(m[1].af_pair_id == "a_y");
}

TEST_CASE("bvd_match is a maximum exact matching") {
  std::mt19937 rng(17);
  for (int round = 0; round < 500; ++round) {
    const auto cf = random_bvd_pairs(rng, "c", rng() % 21);
    const auto af = random_bvd_pairs(rng, "a", rng() % 21);
    const auto m = bl::bvd_match(cf, af);

    CHECK(m.size() == max_matching(cf, af));
    std::map<HalfStep, std::size_t> cf_count;
    std::map<HalfStep, std::size_t> af_count;
    for (const auto& p : cf) ++cf_count[*p.bvd];
    for (const auto& p : af) ++af_count[*p.bvd];
    std::size_t sum_min = 0;
    for (const auto& [v, n] : cf_count) sum_min += std::min(n, af_count[v]);
    CHECK(m.size() == sum_min);

    std::set<std::string> cf_seen;
    std::set<std::string> af_seen;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto cf_it = std::ranges::find(cf, m[i].cf_pair_id, &MatedPair::pair_id);
      const auto af_it = std::ranges::find(af, m[i].af_pair_id, &MatedPair::pair_id);
      REQUIRE(cf_it != cf.end());
      REQUIRE(af_it != af.end());
      CHECK(*cf_it->bvd == m[i].bvd);
      CHECK(*af_it->bvd == m[i].bvd);
      CHECK(cf_seen.insert(m[i].cf_pair_id).second);
      CHECK(af_seen.insert(m[i].af_pair_id).second);
      if (i) CHECK(m[i - 1].bvd <= m[i].bvd);
    }
  }
}

TEST_CASE("take_top takes a prefix") {
  bl::MatchedPairList m;
  for (int i = 0; i < 5; ++i) {
    m.push_back({"c" + std::to_string(i), "a" + std::to_string(i), HalfStep::from_halves(i)});
  }
  const auto s = bl::take_top(m, 3);
  CHECK(s.strategy == bl::Strategy::BvdTopN);
  CHECK(s.n == 3);
  CHECK(s.cf_pair_ids == std::vector<std::string>{"c0", "c1", "c2"});
  CHECK(s.af_pair_ids == std::vector<std::string>{"a0", "a1", "a2"});
  CHECK(s.factors == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(s.provenance_value("max_bvd") == "1");
  CHECK(s.provenance_value("matched_available") == "5");

  CHECK(bl::take_top(m, 5).cf_pair_ids.size() == 5);
  try {
    bl::take_top(m, 6);
    FAIL("expected insufficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficient);
    CHECK(std::string(e.what()).find("available 5") != std::string::npos);
  }

  double prev = -1.0;
  for (std::size_t n = 1; n <= m.size(); ++n) {
    const auto f = bl::take_top(m, n).factors;
    double mean = 0.0;
    for (double x : f) mean += x;
    mean /= static_cast<double>(n);
    CHECK(mean >= prev);
    prev = mean;
  }
}

TEST_CASE("BdmGrouping parsing and presets") {
  CHECK(bl::BdmGrouping::parse("bb,mm,bm").label() == "BB,MM,BM");
  CHECK(bl::BdmGrouping::parse("BM, mm").label() == "MM,BM");
  CHECK(bl::BdmGrouping::non_uni().label() == "BB,MM,BM");
  CHECK(bl::BdmGrouping::bi_multi_no_mm().label() == "BB,BM");
  CHECK(bl::BdmGrouping::has_multi().label() == "MM,BM");
  CHECK_THROWS_AS(bl::BdmGrouping::parse(""), Error);
  CHECK_THROWS_AS(bl::BdmGrouping::parse("bb,xx"), Error);
}

TEST_CASE("bdm_filter keeps allowed types in order") {
  const std::vector<MatedPair> pairs{with_type("p0", PairType::UU), with_type("p1", PairType::BB),
                                     with_type("p2", PairType::BM), with_type("p3", PairType::UM)};
  const auto out = bl::bdm_filter(pairs, bl::BdmGrouping::has_multi());
  REQUIRE(out.size() == 1);
  CHECK(out[0].pair_id == "p2");

  const bl::BdmGrouping all({kAllPairTypes.begin(), kAllPairTypes.end()});
  CHECK(bl::bdm_filter(pairs, all) == pairs);

  std::vector<MatedPair> many;
  std::array<std::size_t, 6> counts{};
  std::mt19937 rng(3);
  for (int i = 0; i < 600; ++i) {
    const auto t = kAllPairTypes[rng() % 6];
    ++counts[static_cast<std::size_t>(t)];
    many.push_back(with_type("q" + std::to_string(i), t));
  }
  CHECK(bl::bdm_filter(many, bl::BdmGrouping::non_uni()).size() ==
        counts[static_cast<std::size_t>(PairType::BB)] + counts[static_cast<std::size_t>(PairType::MM)] +
            counts[static_cast<std::size_t>(PairType::BM)]);
}

TEST_CASE("bdm_sample draws reproducible trials") {
  std::vector<MatedPair> cf;
  std::vector<MatedPair> af;
  for (int i = 0; i < 30; ++i) cf.push_back(with_type("c" + std::to_string(i), PairType::BB));
  for (int i = 0; i < 40; ++i) af.push_back(with_type("a" + std::to_string(i), PairType::BM));

  SUBCASE("exhaustive draw keeps the full set") {
    const auto trials = bl::bdm_sample(std::span(cf).first(30), std::span(af).first(30), 30, 5, 9);
    REQUIRE(trials.size() == 5);
    std::vector<std::string> input;
    for (const auto& p : cf) input.push_back(p.pair_id);
    auto expect = input;
    std::ranges::sort(expect);
    bool any_reordered = false;
    for (const auto& t : trials) {
      auto ids = t.cf_pair_ids;
      any_reordered = any_reordered || ids != input;
      std::ranges::sort(ids);
      CHECK(ids == expect);
    }
    CHECK(any_reordered);
  }
  SUBCASE("same seed reproduces, thread count does not matter") {
    const auto first = bl::bdm_sample(cf, af, 10, 10, 42, "BB");
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto second = bl::bdm_sample(cf, af, 10, 10, 42, "BB");
    omp_set_num_threads(saved);
    CHECK(first == second);
    CHECK(first[0].provenance_value("seed") == "42");
    CHECK(first[0].provenance_value("available_b") == "40");
    CHECK(first[0].cf_pair_ids != first[1].cf_pair_ids);

    const auto other = bl::bdm_sample(cf, af, 10, 10, 43, "BB");
    CHECK(other != first);

    for (const auto& t : first) {
      CHECK(t.cf_pair_ids.size() == 10);
      CHECK(std::set(t.af_pair_ids.begin(), t.af_pair_ids.end()).size() == 10);
      CHECK(t.factors.empty());
    }
  }
  SUBCASE("insufficient pairs names both availabilities") {
    try {
      bl::bdm_sample(cf, af, 31, 10, 1);
      FAIL("expected insufficient");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInsufficient);
      CHECK(std::string(e.what()).find("A=30 B=40") != std::string::npos);
    }
  }
}

TEST_CASE("bdiou_assign greedy examples") {
  const std::vector<std::string> cf{"cf0", "cf1"};
  const std::vector<std::string> af{"af0", "af1"};
  const auto out = bl::bdiou_assign({score(0, 0, 0.9), score(0, 1, 0.5), score(1, 0, 0.8), score(1, 1, 0.7)}, cf, af);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == bl::AssignedSet{"cf0", "af0", 0.9});
  CHECK(out[1] == bl::AssignedSet{"cf1", "af1", 0.7});

  // Equal scores: ids decide, not input positions.
  const std::vector<std::string> cf2{"z", "m", "a"};
  const std::vector<std::string> af2{"y", "b"};
  std::vector<distsim::SetScore> flat;
  for (std::uint32_t i = 0; i < 3; ++i) {
    for (std::uint32_t k = 0; k < 2; ++k) flat.push_back(score(i, k, 0.5));
  }
  const auto tied = bl::bdiou_assign(flat, cf2, af2);
  REQUIRE(tied.size() == 2);
  CHECK(tied[0] == bl::AssignedSet{"a", "b", 0.5});
  CHECK(tied[1] == bl::AssignedSet{"m", "y", 0.5});
  std::ranges::reverse(flat);
  CHECK(bl::bdiou_assign(flat, cf2, af2) == tied);

  CHECK_THROWS_AS(bl::bdiou_assign({score(5, 0, 0.5)}, cf2, af2), Error);
}

TEST_CASE("bdiou_assign properties on scanned sets") {
  std::mt19937_64 rng(23);
  std::vector<BrightnessDistribution> cf_img;
  std::vector<BrightnessDistribution> af_img;
  for (int i = 0; i < 40; ++i) cf_img.push_back(random_dist(rng, 2000));
  for (int i = 0; i < 40; ++i) af_img.push_back(random_dist(rng, 2000));
  std::vector<distsim::PairRef> cf_pairs;
  std::vector<distsim::PairRef> af_pairs;
  std::vector<std::string> cf_ids;
  std::vector<std::string> af_ids;
  for (std::uint32_t i = 0; i < 35; ++i) {
    cf_pairs.push_back({i, i + 5});
    cf_ids.push_back("cf" + std::to_string((i * 8) % 35));
  }
  for (std::uint32_t i = 0; i < 30; ++i) {
    af_pairs.push_back({i, i + 10});
    af_ids.push_back("af" + std::to_string(i));
  }
  const distsim::DistributionTable tc{std::span<const BrightnessDistribution>(cf_img)};
  const distsim::DistributionTable ta{std::span<const BrightnessDistribution>(af_img)};

  std::vector<bl::AssignedSet> runs[2];
  int idx = 0;
  for (int threads : {1, 8}) {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(threads);
    runs[idx++] = bl::bdiou_assign(distsim::collect_set_scores({&tc, cf_pairs, &ta, af_pairs}, 0.0), cf_ids, af_ids);
    omp_set_num_threads(saved);
  }
  CHECK(runs[0] == runs[1]);
  CHECK(runs[0] == bl::bdiou_assign(reference::all_set_scores(cf_img, cf_pairs, af_img, af_pairs, 0.0), cf_ids, af_ids));

  const auto& out = runs[0];
  CHECK(out.size() == 30);
  std::set<std::string> cf_seen;
  std::set<std::string> af_seen;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) CHECK(out[i - 1].bdiou >= out[i].bdiou);
    CHECK(cf_seen.insert(out[i].cf_pair_id).second);
    CHECK(af_seen.insert(out[i].af_pair_id).second);
  }
}

TEST_CASE("bdiou_top takes accepted sets in order") {
  const std::vector<bl::AssignedSet> sets{{"c1", "a1", 0.9}, {"c2", "a2", 0.8}, {"c3", "a3", 0.75}};
  const auto one = bl::bdiou_top(sets, 1);
  CHECK(one.cf_pair_ids == std::vector<std::string>{"c1"});
  CHECK(one.provenance_value("min_bdiou_included") == "0.900000");
  const auto all = bl::bdiou_top(sets, 3);
  CHECK(all.af_pair_ids == std::vector<std::string>{"a1", "a2", "a3"});
  CHECK(all.factors == std::vector<double>{0.9, 0.8, 0.75});
  CHECK_THROWS_AS(bl::bdiou_top(sets, 4), Error);
}

TEST_CASE("subset files round-trip") {
  std::vector<MatedPair> cf;
  std::vector<MatedPair> af;
  for (int i = 0; i < 12; ++i) cf.push_back(with_type("c" + std::to_string(i), PairType::MM));
  for (int i = 0; i < 12; ++i) af.push_back(with_type("a" + std::to_string(i), PairType::MM));
  const auto bdm = bl::bdm_sample(cf, af, 4, 3, 5, "MM,BM");

  bl::MatchedPairList m{{"c0", "a3", HalfStep::from_halves(1)}, {"c1", "a0", HalfStep::from_halves(3)}};
  const std::vector<bl::BalancedSubset> bvd{bl::take_top(m, 2)};
  const std::vector<bl::AssignedSet> sets{{"c1", "a1", 0.123456789}, {"c2", "a2", 0.1}};
  const std::vector<bl::BalancedSubset> iou{bl::bdiou_top(sets, 2)};

  for (const auto* subsets : {&bdm, &bvd, &iou}) {
    std::ostringstream out;
    bl::write_subsets(out, *subsets);
    std::istringstream in(out.str());
    CHECK(bl::read_subsets(in) == *subsets);
  }

  std::istringstream truncated(std::string(bl::kSubsetSchema) + "\nstrategy=BVD_TOP_N\nn=2\ntrial=0\n"
                                                                 "cf_pair_id,af_pair_id,factor\nc0,a0,0\n");
  CHECK_THROWS_AS(bl::read_subsets(truncated), Error);
  std::istringstream unknown(std::string(bl::kSubsetSchema) + "\nstrategy=NOPE\nn=2\n");
  CHECK_THROWS_AS(bl::read_subsets(unknown), Error);
}
