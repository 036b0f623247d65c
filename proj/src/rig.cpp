#include "hkgc/rig.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace hkgc {

std::vector<Triple> RuleInstantiationGraph::triples() const {
  std::vector<Triple> out;
  for (const auto& e : edges) {
    if (e.direction == Direction::Forward) {
      out.push_back({nodes[static_cast<std::size_t>(e.src)], e.relation, nodes[static_cast<std::size_t>(e.dst)]});
    }
  }
  return out;
}

std::vector<GroundRuleMatch> top_ground_rules(const Evidence& evidence, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_ground_rules needs k >= 1");
  const auto& m = evidence.matches;
  std::size_t take = std::min(k, m.size());
  if (take > 0) {
    const double kth = m[take - 1].confidence;
    while (take < m.size() && m[take].confidence == kth) ++take;
  }
  return {m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take)};
}

RuleInstantiationGraph build_rig(std::span<const GroundRuleMatch> matches, EntityId head, EntityId tail) {
  if (matches.empty()) throw std::invalid_argument("cannot build a rule instantiation graph without matches");
  RuleInstantiationGraph rig;
  std::unordered_map<EntityId, std::int32_t> local;
  auto node = [&](EntityId e) {
    auto [it, fresh] = local.emplace(e, static_cast<std::int32_t>(rig.nodes.size()));
    if (fresh) rig.nodes.push_back(e);
    return it->second;
  };
  rig.head_node = node(head);
  std::vector<Triple> seen;
  for (const auto& m : matches) {
    if (m.path.empty()) throw std::invalid_argument("ground rule match without a path");
    const EntityId a = m.path.front(), b = m.path.back();
    if (!((a == head && b == tail) || (a == tail && b == head))) {
      throw std::invalid_argument("ground rule match does not connect the query entities");
    }
    if (rig.contributing_rules.empty() || std::none_of(rig.contributing_rules.begin(), rig.contributing_rules.end(),
                                                       [&](const auto& r) { return r.first == m.rule; })) {
      rig.contributing_rules.emplace_back(m.rule, m.confidence);
    }
    for (const auto& t : m.body) {
      if (std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
      seen.push_back(t);
      const auto s = node(t.head);
      const auto d = node(t.tail);
      rig.edges.push_back({s, d, t.relation, Direction::Forward});
      rig.edges.push_back({d, s, t.relation, Direction::Inverse});
    }
  }
  rig.tail_node = node(tail);
  return rig;
}

std::vector<int> rig_distances(const RuleInstantiationGraph& rig, std::int32_t from) {
  std::vector<int> dist(rig.nodes.size(), -1);
  std::vector<std::vector<std::int32_t>> adj(rig.nodes.size());
  for (const auto& e : rig.edges) adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
  std::vector<std::int32_t> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto u = queue[i];
    for (auto v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

Tensor featurize(const RuleInstantiationGraph& rig, int cap) {
  if (cap < 0) throw std::invalid_argument("distance cap must be non-negative");
  const int buckets = cap + 2;
  const auto from_head = rig_distances(rig, rig.head_node);
  const auto from_tail = rig_distances(rig, rig.tail_node);
  Tensor f = Tensor::Zero(static_cast<Eigen::Index>(rig.nodes.size()), 2 * buckets);
  auto bucket = [&](int d) { return d < 0 || d > cap ? cap + 1 : d; };
  for (std::size_t i = 0; i < rig.nodes.size(); ++i) {
    f(static_cast<Eigen::Index>(i), bucket(from_head[i])) = 1.0;
    f(static_cast<Eigen::Index>(i), buckets + bucket(from_tail[i])) = 1.0;
  }
  return f;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string rig_to_dot(const RuleInstantiationGraph& rig, int cap, const Vocabulary& entities,
                       const Vocabulary& relations) {
  const auto from_head = rig_distances(rig, rig.head_node);
  const auto from_tail = rig_distances(rig, rig.tail_node);
  auto shown = [&](int d) { return d < 0 || d > cap ? std::string(">") + std::to_string(cap) : std::to_string(d); };
  std::ostringstream out;
  out << "digraph rig {\n  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n";
  for (std::size_t i = 0; i < rig.nodes.size(); ++i) {
    const auto idx = static_cast<std::int32_t>(i);
    out << "  n" << i << " [label=\"" << escape(entities.name(rig.nodes[i])) << "\\n(" << shown(from_head[i]) << ","
        << shown(from_tail[i]) << ")\"";
    if (idx == rig.head_node) out << ", shape=box, style=filled, fillcolor=lightblue, xlabel=\"head\"";
    if (idx == rig.tail_node) out << ", shape=box, style=filled, fillcolor=salmon, xlabel=\"tail\"";
    out << "];\n";
  }
  for (const auto& e : rig.edges) {
    if (e.direction != Direction::Forward) continue;
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << escape(relations.name(e.relation)) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace hkgc
