#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hkgc/graph.hpp"
#include "hkgc/random.hpp"

namespace hkgc {

/// One step of a rule body: traverse `relation` forwards or backwards.
struct BodyAtom {
  RelationId relation = 0;
  Direction direction = Direction::Forward;

  friend auto operator<=>(const BodyAtom&, const BodyAtom&) = default;
};

/// h(X0,Xn) <= b1(X0,X1), ..., bn(Xn-1,Xn). Variables are positional and never stored.
struct ClosedPathRule {
  RelationId head = 0;
  std::vector<BodyAtom> body;

  friend auto operator<=>(const ClosedPathRule&, const ClosedPathRule&) = default;
  friend bool operator==(const ClosedPathRule&, const ClosedPathRule&) = default;
};

struct RuleHash {
  std::size_t operator()(const ClosedPathRule& r) const noexcept;
};

struct RuleStats {
  std::int64_t support = 0;
  std::int64_t body_groundings = 0;
  double confidence = 0.0;
  bool estimated = false;
};

struct ScoredRule {
  ClosedPathRule rule;
  RuleStats stats;
};

/// Total order used everywhere rules are ranked: confidence desc, support desc,
/// body length asc, then lexicographic body atoms, then head relation.
bool rule_precedes(const ScoredRule& a, const ScoredRule& b);

/// Deduplicated rules with a per-head index sorted by rule_precedes.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::int32_t num_relations) : by_head_(static_cast<std::size_t>(num_relations)) {}

  /// Inserts the rule, or raises its statistics to the element-wise max when already present.
  void insert(const ClosedPathRule& rule, const RuleStats& stats);
  void merge(const RuleSet& other);

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  std::span<const ScoredRule> rules() const { return rules_; }
  const ScoredRule& at(std::size_t index) const { return rules_.at(index); }
  std::optional<std::size_t> find(const ClosedPathRule& rule) const;
  /// Indices into rules() for rules with the given head, best first.
  std::span<const std::size_t> rules_for(RelationId head) const;

 private:
  void place(std::size_t index);

  std::vector<ScoredRule> rules_;
  std::unordered_map<ClosedPathRule, std::size_t, RuleHash> lookup_;
  std::vector<std::vector<std::size_t>> by_head_;
};

struct MineOptions {
  double budget_seconds = 10.0;
  /// Fixed number of sampling iterations instead of the wall-clock budget.
  std::optional<std::int64_t> iterations;
  /// Enumerate every ground path of every triple instead of sampling.
  bool exhaustive = false;
  int max_len = 4;
  double pessimism = 5.0;
  std::int64_t min_support = 2;
  double min_confidence = 1e-4;
  std::int64_t grounding_cap = 100000;
  std::uint64_t seed = 0;
};

RuleSet mine(const KnowledgeGraph& kg, const MineOptions& options);

/// A walk x = e0, e1, ..., en = y together with its per-step atoms, and the triple it explains.
struct GroundPath {
  Triple head;
  std::vector<EntityId> entities;
  std::vector<BodyAtom> atoms;
};

/// Samples a triple uniformly, then a simple path of random length <= max_len connecting its
/// endpoints. Returns nullopt when no path was found within the retry cap.
std::optional<GroundPath> sample_ground_path(const KnowledgeGraph& kg, int max_len, Rng& rng,
                                             int retries = 8);

std::optional<ClosedPathRule> generalize(const GroundPath& path, RelationId head, int max_len);

/// Counts distinct (X0, Xn) body groundings (simple paths only) and how many of them satisfy
/// the head. Past `grounding_cap` partial joins it switches to sampled start entities.
RuleStats score_rule(const KnowledgeGraph& kg, const ClosedPathRule& rule, std::int64_t grounding_cap,
                     double pessimism);

std::string rule_to_string(const ClosedPathRule& rule, const Vocabulary& relations);
ClosedPathRule rule_from_string(std::string_view text, const Vocabulary& relations);

/// One rule per line: support, body groundings, confidence, rule text (tab separated).
void write_rules(std::ostream& out, const RuleSet& rules, const Vocabulary& relations);
RuleSet read_rules(std::istream& in, const Vocabulary& relations);

}  // namespace hkgc
