#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hkgc/graph.hpp"
#include "hkgc/rule_engine.hpp"
#include "hkgc/tensor.hpp"

namespace hkgc {

struct RigEdge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  RelationId relation = 0;
  Direction direction = Direction::Forward;

  friend bool operator==(const RigEdge&, const RigEdge&) = default;
};

/// Union of the body triples of the ground rules that predict one candidate.
/// Every forward edge is paired with its inverse.
struct RuleInstantiationGraph {
  std::vector<EntityId> nodes;  ///< local index -> entity
  std::vector<RigEdge> edges;
  std::int32_t head_node = 0;
  std::int32_t tail_node = 0;
  std::vector<std::pair<std::size_t, double>> contributing_rules;  ///< (rule index, confidence)

  /// The distinct forward triples, in first-seen order.
  std::vector<Triple> triples() const;
};

/// The k most confident matches plus every further match tied with the k-th.
std::vector<GroundRuleMatch> top_ground_rules(const Evidence& evidence, std::size_t k);

/// `head`/`tail` are the query anchor and the candidate, in either orientation of the paths.
RuleInstantiationGraph build_rig(std::span<const GroundRuleMatch> matches, EntityId head, EntityId tail);

/// One-hot(distance to head) ++ one-hot(distance to tail), distances measured inside the RIG,
/// with bucket cap+1 for anything farther. Width 2 * (cap + 2).
Tensor featurize(const RuleInstantiationGraph& rig, int cap);

/// Undirected hop distances inside the RIG from a local node; -1 when unreachable.
std::vector<int> rig_distances(const RuleInstantiationGraph& rig, std::int32_t from);

std::string rig_to_dot(const RuleInstantiationGraph& rig, int cap, const Vocabulary& entities,
                       const Vocabulary& relations);

}  // namespace hkgc
