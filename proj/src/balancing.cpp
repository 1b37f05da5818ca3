#include "lumibal/balancing.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <numeric>
#include <ostream>
#include <istream>

#include "lumibal/error.hpp"
#include "lumibal/io.hpp"
#include "lumibal/random.hpp"

namespace lumibal::balancing {
namespace {

HalfStep require_bvd(const MatedPair& p) {
  if (!p.bvd) throw Error(ErrorCode::kIntegrity, "pair '" + p.pair_id + "' has no bvd");
  return *p.bvd;
}

PairType require_type(const MatedPair& p) {
  if (!p.pair_type) throw Error(ErrorCode::kIntegrity, "pair '" + p.pair_id + "' has no pair type");
  return *p.pair_type;
}

// Lexicographic rank of each id.
std::vector<std::uint32_t> ranks_of(std::span<const std::string> ids) {
  std::vector<std::uint32_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0u);
  std::ranges::sort(order, [&](auto a, auto b) { return ids[a] < ids[b]; });
  std::vector<std::uint32_t> rank(ids.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::BvdTopN: return "BVD_TOP_N";
    case Strategy::BdmSample: return "BDM_SAMPLE";
    case Strategy::BdiouTopN: return "BDIOU_TOP_N";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto st : {Strategy::BvdTopN, Strategy::BdmSample, Strategy::BdiouTopN}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string BalancedSubset::provenance_value(std::string_view key) const {
  for (const auto& [k, v] : provenance) {
    if (k == key) return v;
  }
  return {};
}

BdmGrouping::BdmGrouping(std::vector<PairType> allowed) : allowed_(std::move(allowed)) {
  std::ranges::sort(allowed_);
  allowed_.erase(std::unique(allowed_.begin(), allowed_.end()), allowed_.end());
  if (allowed_.empty()) throw Error(ErrorCode::kConfig, "BDM grouping needs at least one pair type");
}

BdmGrouping BdmGrouping::parse(std::string_view text) {
  std::vector<PairType> types;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(',', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto tok = text.substr(start, pos - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (!tok.empty()) {
      const auto t = parse_pair_type(tok);
      if (!t) throw Error(ErrorCode::kConfig, "unknown pair type '" + std::string(tok) + "'");
      types.push_back(*t);
    }
    start = pos + 1;
  }
  return BdmGrouping(std::move(types));
}

bool BdmGrouping::allows(PairType t) const { return std::ranges::binary_search(allowed_, t); }

std::string BdmGrouping::label() const {
  std::string out;
  for (auto t : allowed_) {
    if (!out.empty()) out += ',';
    out += to_string(t);
  }
  return out;
}

MatchedPairList bvd_match(std::span<const MatedPair> cf, std::span<const MatedPair> af) {
  for (const auto& p : cf) require_bvd(p);
  std::vector<std::size_t> cf_order(cf.size());
  std::iota(cf_order.begin(), cf_order.end(), std::size_t{0});
  std::ranges::sort(cf_order, [&](auto a, auto b) {
    const auto ba = *cf[a].bvd;
    const auto bb = *cf[b].bvd;
    if (ba != bb) return ba < bb;
    return cf[a].pair_id < cf[b].pair_id;
  });

  struct Bucket {
    std::vector<std::size_t> members;  // sorted by pair_id
    std::size_t next = 0;
  };
  std::map<HalfStep, Bucket> buckets;
  for (std::size_t i = 0; i < af.size(); ++i) buckets[require_bvd(af[i])].members.push_back(i);
  for (auto& [_, bucket] : buckets) {
    std::ranges::sort(bucket.members, [&](auto a, auto b) { return af[a].pair_id < af[b].pair_id; });
  }

  MatchedPairList out;
  for (auto i : cf_order) {
    const auto value = *cf[i].bvd;
    const auto it = buckets.find(value);
    if (it == buckets.end() || it->second.next == it->second.members.size()) continue;
    const auto& partner = af[it->second.members[it->second.next++]];
    out.push_back({cf[i].pair_id, partner.pair_id, value});
  }
  return out;
}

BalancedSubset take_top(const MatchedPairList& matched, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kConfig, "subset size must be positive");
  if (n > matched.size()) {
    throw Error(ErrorCode::kInsufficient, "insufficient matched pairs: requested " + std::to_string(n) +
                                              ", available " + std::to_string(matched.size()));
  }
  BalancedSubset s;
  s.strategy = Strategy::BvdTopN;
  s.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    s.cf_pair_ids.push_back(matched[i].cf_pair_id);
    s.af_pair_ids.push_back(matched[i].af_pair_id);
    s.factors.push_back(matched[i].bvd.value());
  }
  s.provenance = {{"matched_available", std::to_string(matched.size())},
                  {"max_bvd", format_double(matched[n - 1].bvd.value())}};
  return s;
}

std::vector<MatedPair> bdm_filter(std::span<const MatedPair> pairs, const BdmGrouping& g) {
  std::vector<MatedPair> out;
  for (const auto& p : pairs) {
    if (g.allows(require_type(p))) out.push_back(p);
  }
  return out;
}

std::vector<BalancedSubset> bdm_sample(std::span<const MatedPair> cf_filtered,
                                       std::span<const MatedPair> af_filtered, std::size_t n,
                                       int trials, std::uint64_t seed,
                                       const std::string& grouping_label) {
  if (n == 0) throw Error(ErrorCode::kConfig, "subset size must be positive");
  if (trials < 1) throw Error(ErrorCode::kConfig, "trials must be >= 1");
  if (n > cf_filtered.size() || n > af_filtered.size()) {
    throw Error(ErrorCode::kInsufficient,
                "insufficient pairs: requested " + std::to_string(n) + ", available A=" +
                    std::to_string(cf_filtered.size()) + " B=" + std::to_string(af_filtered.size()));
  }
  std::vector<std::string> cf_ids;
  std::vector<std::string> af_ids;
  for (const auto& p : cf_filtered) cf_ids.push_back(p.pair_id);
  for (const auto& p : af_filtered) af_ids.push_back(p.pair_id);

  std::vector<BalancedSubset> out(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(static)
  for (int t = 0; t < trials; ++t) {
    auto cf = cf_ids;
    auto af = af_ids;
    rng::Stream cf_stream(rng::derive_seed(seed, static_cast<std::uint64_t>(t), 0));
    rng::Stream af_stream(rng::derive_seed(seed, static_cast<std::uint64_t>(t), 1));
    cf_stream.shuffle(std::span<std::string>(cf));
    af_stream.shuffle(std::span<std::string>(af));
    cf.resize(n);
    af.resize(n);
    auto& s = out[static_cast<std::size_t>(t)];
    s.strategy = Strategy::BdmSample;
    s.n = n;
    s.cf_pair_ids = std::move(cf);
    s.af_pair_ids = std::move(af);
    s.provenance = {{"grouping", grouping_label},
                    {"seed", std::to_string(seed)},
                    {"trials", std::to_string(trials)},
                    {"available_a", std::to_string(cf_ids.size())},
                    {"available_b", std::to_string(af_ids.size())}};
  }
  return out;
}

std::vector<AssignedSet> bdiou_assign(std::vector<distsim::SetScore> scores,
                                      std::span<const std::string> cf_ids,
                                      std::span<const std::string> af_ids) {
  const auto cf_rank = ranks_of(cf_ids);
  const auto af_rank = ranks_of(af_ids);
  for (const auto& s : scores) {
    if (s.cf_index >= cf_ids.size() || s.af_index >= af_ids.size()) {
      throw Error(ErrorCode::kReference, "set score refers to a pair outside the id lists");
    }
  }
  std::ranges::sort(scores, [&](const distsim::SetScore& a, const distsim::SetScore& b) {
    if (a.bdiou != b.bdiou) return a.bdiou > b.bdiou;
    if (a.cf_index != b.cf_index) return cf_rank[a.cf_index] < cf_rank[b.cf_index];
    return af_rank[a.af_index] < af_rank[b.af_index];
  });

  std::vector<bool> cf_used(cf_ids.size(), false);
  std::vector<bool> af_used(af_ids.size(), false);
  std::vector<AssignedSet> out;
  const std::size_t limit = std::min(cf_ids.size(), af_ids.size());
  for (const auto& s : scores) {
    if (out.size() == limit) break;
    if (cf_used[s.cf_index] || af_used[s.af_index]) continue;
    cf_used[s.cf_index] = true;
    af_used[s.af_index] = true;
    out.push_back({cf_ids[s.cf_index], af_ids[s.af_index], s.bdiou});
  }
  return out;
}

BalancedSubset bdiou_top(std::span<const AssignedSet> assigned, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kConfig, "subset size must be positive");
  if (n > assigned.size()) {
    throw Error(ErrorCode::kInsufficient, "insufficient assigned sets: requested " + std::to_string(n) +
                                              ", available " + std::to_string(assigned.size()));
  }
  BalancedSubset s;
  s.strategy = Strategy::BdiouTopN;
  s.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    s.cf_pair_ids.push_back(assigned[i].cf_pair_id);
    s.af_pair_ids.push_back(assigned[i].af_pair_id);
    s.factors.push_back(assigned[i].bdiou);
  }
  s.provenance = {{"assigned_available", std::to_string(assigned.size())},
                  {"min_bdiou_included", format_fixed(assigned[n - 1].bdiou, 6)}};
  return s;
}

void write_subsets(std::ostream& out, std::span<const BalancedSubset> trials) {
  if (trials.empty()) throw Error(ErrorCode::kIo, "no subsets to write");
  out << kSubsetSchema << '\n'
      << "strategy=" << to_string(trials.front().strategy) << '\n'
      << "n=" << trials.front().n << '\n';
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& s = trials[t];
    out << "trial=" << t << '\n';
    for (const auto& [k, v] : s.provenance) out << k << '=' << v << '\n';
    out << "cf_pair_id,af_pair_id,factor\n";
    for (std::size_t i = 0; i < s.cf_pair_ids.size(); ++i) {
      out << s.cf_pair_ids[i] << ',' << s.af_pair_ids[i] << ',';
      if (i < s.factors.size()) out << format_double(s.factors[i]);
      out << '\n';
    }
  }
}

std::vector<BalancedSubset> read_subsets(std::istream& in, std::string_view source) {
  const auto fail = [&](std::size_t line, const std::string& msg) {
    return Error(ErrorCode::kIngestion, std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next() || line != kSubsetSchema) throw fail(lineno, "expected schema tag");
  if (!next() || !line.starts_with("strategy=")) throw fail(lineno, "expected strategy=");
  const auto strategy = parse_strategy(std::string_view(line).substr(9));
  if (!strategy) throw fail(lineno, "unknown strategy");
  if (!next() || !line.starts_with("n=")) throw fail(lineno, "expected n=");
  std::size_t n = 0;
  {
    const auto v = std::string_view(line).substr(2);
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size() || n == 0) throw fail(lineno, "malformed n");
  }

  std::vector<BalancedSubset> out;
  bool more = next();
  while (more) {
    if (!line.starts_with("trial=")) throw fail(lineno, "expected trial=");
    BalancedSubset s;
    s.strategy = *strategy;
    s.n = n;
    while ((more = next()) && line != "cf_pair_id,af_pair_id,factor") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw fail(lineno, "expected key=value");
      s.provenance.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    if (!more) throw fail(lineno, "missing row header");
    for (std::size_t i = 0; i < n; ++i) {
      if (!next()) throw fail(lineno, "expected " + std::to_string(n) + " rows");
      const auto c1 = line.find(',');
      const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
      if (c2 == std::string::npos) throw fail(lineno, "expected cf_pair_id,af_pair_id,factor");
      s.cf_pair_ids.push_back(line.substr(0, c1));
      s.af_pair_ids.push_back(line.substr(c1 + 1, c2 - c1 - 1));
      const auto f = std::string_view(line).substr(c2 + 1);
      if (!f.empty()) {
        double v = 0;
        const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || p != f.data() + f.size()) throw fail(lineno, "malformed factor");
        s.factors.push_back(v);
      }
    }
    if (!s.factors.empty() && s.factors.size() != n) throw fail(lineno, "factor column partially filled");
    out.push_back(std::move(s));
    more = next();
  }
  if (out.empty()) throw fail(lineno, "no trials");
  return out;
}

}  // namespace lumibal::balancing
