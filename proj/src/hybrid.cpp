#include "hkgc/hybrid.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace hkgc {

namespace {

constexpr std::pair<Primary, std::string_view> kPrimaries[] = {
    {Primary::AnyburlMax, "anyburl-max"}, {Primary::NoisyOr, "noisy-or"}, {Primary::Rgcn, "rgcn"},
    {Primary::CompGcn, "compgcn"},        {Primary::Nbf, "nbfnet"},
};

constexpr std::pair<Fallback, std::string_view> kFallbacks[] = {
    {Fallback::Shuffle, "shuffle"},
    {Fallback::Nbf, "nbfnet"},
};

}  // namespace

StrategySpec StrategySpec::parse(std::string_view text) {
  const auto plus = text.find('+');
  if (plus == std::string_view::npos) throw std::invalid_argument("strategy must look like <primary>+<fallback>");
  auto p = text.substr(0, plus);
  auto f = text.substr(plus + 1);
  if (p == "nbf") p = "nbfnet";
  if (p == "anyburl") p = "anyburl-max";
  if (f == "nbf") f = "nbfnet";
  StrategySpec spec;
  auto pi = std::find_if(std::begin(kPrimaries), std::end(kPrimaries), [&](const auto& x) { return x.second == p; });
  auto fi = std::find_if(std::begin(kFallbacks), std::end(kFallbacks), [&](const auto& x) { return x.second == f; });
  if (pi == std::end(kPrimaries)) throw std::invalid_argument("unknown primary scorer: " + std::string(p));
  if (fi == std::end(kFallbacks)) throw std::invalid_argument("unknown fallback: " + std::string(f));
  spec.primary = pi->first;
  spec.fallback = fi->first;
  return spec;
}

std::string StrategySpec::name() const {
  std::string out;
  for (const auto& [p, n] : kPrimaries) {
    if (p == primary) out = n;
  }
  for (const auto& [f, n] : kFallbacks) {
    if (f == fallback) out += "+" + std::string(n);
  }
  return out;
}

std::vector<StrategySpec> all_strategies() {
  std::vector<StrategySpec> out;
  for (const auto& [p, _] : kPrimaries) {
    for (const auto& [f, __] : kFallbacks) out.push_back({p, f});
  }
  return out;
}

HybridRanking compose(std::span<const RankedEntry> a_order, std::span<const RankedEntry> b_order) {
  std::unordered_set<EntityId> seen;
  HybridRanking out;
  out.entries.reserve(a_order.size() + b_order.size());
  std::int32_t next = 0;
  auto append = [&](std::span<const RankedEntry> part, Provenance tag) {
    std::int32_t base = next;
    for (const auto& e : part) {
      if (!seen.insert(e.entity).second) throw std::invalid_argument("entity ranked twice in a hybrid ranking");
      out.entries.push_back({e.entity, e.score, base + e.tie_group, tag});
      next = std::max(next, base + e.tie_group + 1);
    }
  };
  append(a_order, Provenance::A);
  append(b_order, Provenance::B);
  return out;
}

std::vector<RankedEntry> primary_order(const CandidatePartition& partition, const Query& q, Primary primary,
                                       const Models& models, const std::vector<double>* nbf_scores) {
  switch (primary) {
    case Primary::AnyburlMax:
      return rank_max_tiebreak(partition);
    case Primary::NoisyOr:
      return rank_noisy_or(partition);
    case Primary::Rgcn:
      if (!models.rgcn) throw std::invalid_argument("strategy needs an rgcn model");
      return models.rgcn->rank(partition, q);
    case Primary::CompGcn:
      if (!models.compgcn) throw std::invalid_argument("strategy needs a compgcn model");
      return models.compgcn->rank(partition, q);
    case Primary::Nbf: {
      if (!nbf_scores) throw std::invalid_argument("strategy needs nbf scores");
      std::vector<RankedEntry> entries;
      for (const auto& ev : partition.a_q) {
        entries.push_back({ev.candidate, (*nbf_scores)[static_cast<std::size_t>(ev.candidate)], 0});
      }
      return order_by_score(std::move(entries));
    }
  }
  throw std::logic_error("unhandled primary scorer");
}

std::vector<RankedEntry> fallback_order(const CandidatePartition& partition, Fallback fallback,
                                        const std::vector<double>* nbf_scores, Rng* rng) {
  std::vector<RankedEntry> entries;
  entries.reserve(partition.b_q.size());
  if (fallback == Fallback::Nbf) {
    if (!nbf_scores) throw std::invalid_argument("strategy needs nbf scores");
    for (auto e : partition.b_q) entries.push_back({e, (*nbf_scores)[static_cast<std::size_t>(e)], 0});
    return order_by_score(std::move(entries));
  }
  if (!rng) throw std::invalid_argument("shuffle fallback needs a random generator");
  std::vector<EntityId> order(partition.b_q.begin(), partition.b_q.end());
  std::shuffle(order.begin(), order.end(), *rng);
  for (std::size_t i = 0; i < order.size(); ++i) {
    entries.push_back({order[i], 0.0, static_cast<std::int32_t>(i)});
  }
  return entries;
}

HybridRanking run_strategy(const KnowledgeGraph& facts, const Query& q, const CandidatePartition& partition,
                           const StrategySpec& spec, const Models& models, Rng* rng,
                           const std::vector<double>* nbf_scores) {
  std::vector<double> own;
  if (spec.needs_nbf() && !nbf_scores) {
    if (!models.nbf) throw std::invalid_argument("strategy needs an nbf model");
    own = models.nbf->score_all(facts, q);
    nbf_scores = &own;
  }
  const auto a = primary_order(partition, q, spec.primary, models, nbf_scores);
  const auto b = fallback_order(partition, spec.fallback, nbf_scores, rng);
  return compose(a, b);
}

std::uint64_t query_seed(std::uint64_t seed, std::uint64_t run, const Query& q) {
  return derive_seed(seed, {run, static_cast<std::uint64_t>(q.anchor), static_cast<std::uint64_t>(q.relation),
                            static_cast<std::uint64_t>(q.direction)});
}

}  // namespace hkgc
