#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkgc/rankers.hpp"
#include "hkgc/rule_engine.hpp"

namespace hkgc {

enum class Primary : std::uint8_t { AnyburlMax, NoisyOr, Rgcn, CompGcn, Nbf };
enum class Fallback : std::uint8_t { Shuffle, Nbf };

struct StrategySpec {
  Primary primary = Primary::AnyburlMax;
  Fallback fallback = Fallback::Shuffle;

  /// "<primary>+<fallback>", e.g. "anyburl-max+shuffle" or "compgcn+nbfnet".
  static StrategySpec parse(std::string_view text);
  std::string name() const;

  bool needs_nbf() const { return primary == Primary::Nbf || fallback == Fallback::Nbf; }

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// Every primary/fallback pair, in table order.
std::vector<StrategySpec> all_strategies();

enum class Provenance : std::uint8_t { A, B };

struct HybridEntry {
  EntityId entity = 0;
  double score = 0.0;
  std::int32_t tie_group = 0;
  Provenance provenance = Provenance::A;
};

/// A_q entries first, then B_q; tie groups never span the boundary.
struct HybridRanking {
  std::vector<HybridEntry> entries;
};

/// Loaded scorers; only the ones the strategy needs must be set.
struct Models {
  const RigAggregator* rgcn = nullptr;
  const RigAggregator* compgcn = nullptr;
  const NbfRanker* nbf = nullptr;
};

HybridRanking compose(std::span<const RankedEntry> a_order, std::span<const RankedEntry> b_order);

/// Orders A_q with the primary scorer. `nbf_scores` (one per entity) is required for the nbfnet primary.
std::vector<RankedEntry> primary_order(const CandidatePartition& partition, const Query& q, Primary primary,
                                       const Models& models, const std::vector<double>* nbf_scores);

/// Orders B_q: a seeded shuffle (each entity its own tie group) or by NBF score.
std::vector<RankedEntry> fallback_order(const CandidatePartition& partition, Fallback fallback,
                                        const std::vector<double>* nbf_scores, Rng* rng);

/// `facts` is only used to compute NBF scores when `nbf_scores` is not given.
HybridRanking run_strategy(const KnowledgeGraph& facts, const Query& q, const CandidatePartition& partition,
                           const StrategySpec& spec, const Models& models, Rng* rng,
                           const std::vector<double>* nbf_scores = nullptr);

/// Seed for the shuffle of one query in one run.
std::uint64_t query_seed(std::uint64_t seed, std::uint64_t run, const Query& q);

}  // namespace hkgc
