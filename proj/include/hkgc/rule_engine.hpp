#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hkgc/graph.hpp"
#include "hkgc/rules.hpp"

namespace hkgc {

/// One grounding of a rule body connecting the query anchor to a candidate.
struct GroundRuleMatch {
  std::size_t rule = 0;  ///< index into RuleSet::rules()
  double confidence = 0.0;
  std::vector<Triple> body;       ///< b1..bn as stored in the fact graph
  std::vector<EntityId> path;     ///< X0..Xn
};

struct Evidence {
  EntityId candidate = 0;
  /// Best matches first, at most ApplyOptions::max_matches_per_candidate of them.
  std::vector<GroundRuleMatch> matches;
  /// One confidence per distinct rule that fires, descending.
  std::vector<double> rule_confidences;
  /// All groundings found for this candidate, including the ones not retained.
  std::int64_t total_matches = 0;
};

/// A_q: candidates with rule evidence (ascending entity id). B_q: everything else.
struct CandidatePartition {
  std::vector<Evidence> a_q;
  std::vector<EntityId> b_q;

  const Evidence* find(EntityId e) const;
};

struct ApplyOptions {
  std::size_t max_matches_per_candidate = 100;
  /// Join steps allowed per rule before its enumeration is truncated.
  std::int64_t max_visits_per_rule = 2'000'000;
};

/// `base` with the match cap raised to at least `top_k`, so top-k ground rules are exact.
inline ApplyOptions covering_top_k(std::size_t top_k, ApplyOptions base = {}) {
  base.max_matches_per_candidate = std::max(base.max_matches_per_candidate, top_k);
  return base;
}

CandidatePartition apply_rules(const KnowledgeGraph& facts, const RuleSet& rules, const Query& q,
                               const ApplyOptions& options = {});

/// A ranked candidate. Entries sharing `tie_group` are indistinguishable to the scorer.
struct RankedEntry {
  EntityId entity = 0;
  double score = 0.0;
  std::int32_t tie_group = 0;
};

/// Max confidence, ties broken by comparing the next most confident rules; a list that is a
/// proper prefix of another ranks below it. Remaining ties are ordered by entity id.
std::vector<RankedEntry> rank_max_tiebreak(const CandidatePartition& partition);

double noisy_or(std::span<const double> confidences);

/// 1 - prod(1 - c) over distinct firing rules.
std::vector<RankedEntry> rank_noisy_or(const CandidatePartition& partition);

/// Sorts by score descending then entity id, and assigns tie groups by exact score equality.
std::vector<RankedEntry> order_by_score(std::vector<RankedEntry> entries);

}  // namespace hkgc
