#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lumibal/distsim.hpp"
#include "lumibal/types.hpp"

namespace lumibal::balancing {

enum class Strategy : std::uint8_t { BvdTopN, BdmSample, BdiouTopN };

std::string_view to_string(Strategy s);  // "BVD_TOP_N", ...
std::optional<Strategy> parse_strategy(std::string_view s);

struct MatchedEntry {
  std::string cf_pair_id;
  std::string af_pair_id;
  HalfStep bvd;
  friend bool operator==(const MatchedEntry&, const MatchedEntry&) = default;
};

// Sorted by bvd ascending; each pair id appears at most once per side.
using MatchedPairList = std::vector<MatchedEntry>;

// Ordered key/value parameters describing how a subset was drawn.
using Provenance = std::vector<std::pair<std::string, std::string>>;

struct BalancedSubset {
  Strategy strategy = Strategy::BvdTopN;
  std::size_t n = 0;
  std::vector<std::string> cf_pair_ids;
  std::vector<std::string> af_pair_ids;
  // Balancing factor per selected row (BVD or BD-IoU); empty for BDM.
  std::vector<double> factors;
  Provenance provenance;

  std::string provenance_value(std::string_view key) const;
  friend bool operator==(const BalancedSubset&, const BalancedSubset&) = default;
};

class BdmGrouping {
 public:
  // Throws Error(kConfig) on an empty set.
  explicit BdmGrouping(std::vector<PairType> allowed);
  // "bb,mm,bm" (case-insensitive).
  static BdmGrouping parse(std::string_view text);

  static BdmGrouping non_uni() { return BdmGrouping({PairType::BB, PairType::MM, PairType::BM}); }
  static BdmGrouping bi_multi_no_mm() { return BdmGrouping({PairType::BB, PairType::BM}); }
  static BdmGrouping has_multi() { return BdmGrouping({PairType::MM, PairType::BM}); }

  bool allows(PairType t) const;
  const std::vector<PairType>& types() const { return allowed_; }
  std::string label() const;  // "BB,MM,BM" in canonical order

 private:
  std::vector<PairType> allowed_;
};

// Exact-BVD unique matching. Cohort-A pairs go in ascending (bvd, id) order and
// each takes the lexicographically smallest unused cohort-B pair with the same
// bvd. Pairs must carry bvd.
MatchedPairList bvd_match(std::span<const MatedPair> cf, std::span<const MatedPair> af);

// First n entries. Throws Error(kInsufficient) when n exceeds the list.
BalancedSubset take_top(const MatchedPairList& matched, std::size_t n);

// Stable subsequence whose pair_type is allowed. Pairs must carry pair_type.
std::vector<MatedPair> bdm_filter(std::span<const MatedPair> pairs, const BdmGrouping& g);

// One subset per trial. Trial t shuffles each cohort's list with the stream
// rng::derive_seed(seed, t, cohort) and keeps the first n of each.
std::vector<BalancedSubset> bdm_sample(std::span<const MatedPair> cf_filtered,
                                       std::span<const MatedPair> af_filtered,
                                       std::size_t n, int trials, std::uint64_t seed,
                                       const std::string& grouping_label = {});

struct AssignedSet {
  std::string cf_pair_id;
  std::string af_pair_id;
  double bdiou = 0.0;
  friend bool operator==(const AssignedSet&, const AssignedSet&) = default;
};

// Greedy unique assignment over sets sorted by descending bdiou, ties broken by
// cf id then af id. cf_ids / af_ids map SetScore indices to pair ids.
std::vector<AssignedSet> bdiou_assign(std::vector<distsim::SetScore> scores,
                                      std::span<const std::string> cf_ids,
                                      std::span<const std::string> af_ids);

// First n accepted sets. Throws Error(kInsufficient) when n exceeds the list.
BalancedSubset bdiou_top(std::span<const AssignedSet> assigned, std::size_t n);

// Subset files hold one or more trials of the same strategy:
//   #lumibal-subset v1
//   strategy=<BVD_TOP_N|BDM_SAMPLE|BDIOU_TOP_N>
//   n=<pairs per cohort>
//   then per trial:
//   trial=<t>
//   <provenance key>=<value>        (zero or more)
//   cf_pair_id,af_pair_id,factor     (column header, then n rows; factor
//                                     empty for BDM)
inline constexpr std::string_view kSubsetSchema = "#lumibal-subset v1";

void write_subsets(std::ostream& out, std::span<const BalancedSubset> trials);
std::vector<BalancedSubset> read_subsets(std::istream& in,
                                         std::string_view source = "<stream>");

}  // namespace lumibal::balancing
