#include "hkgc/rule_engine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace hkgc {

const Evidence* CandidatePartition::find(EntityId e) const {
  auto it = std::lower_bound(a_q.begin(), a_q.end(), e,
                             [](const Evidence& ev, EntityId id) { return ev.candidate < id; });
  return it != a_q.end() && it->candidate == e ? &*it : nullptr;
}

namespace {

class RuleApplier {
 public:
  RuleApplier(const KnowledgeGraph& facts, const Query& q, const ApplyOptions& options)
      : facts_(facts), query_(q), options_(options), slot_(static_cast<std::size_t>(facts.num_entities()), -1) {}

  void apply(std::size_t rule_index, const ScoredRule& rule) {
    rule_index_ = rule_index;
    confidence_ = rule.stats.confidence;
    const auto& body = rule.rule.body;
    steps_.clear();
    if (query_.direction == QueryDirection::Tail) {
      steps_ = body;
    } else {
      for (auto it = body.rbegin(); it != body.rend(); ++it) steps_.push_back({it->relation, flip(it->direction)});
    }
    original_ = &body;
    walk_.assign(1, query_.anchor);
    visits_ = 0;
    descend(query_.anchor);
  }

  CandidatePartition finish() {
    CandidatePartition out;
    std::vector<std::size_t> order(evidence_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return evidence_[a].candidate < evidence_[b].candidate; });
    out.a_q.reserve(order.size());
    for (auto i : order) out.a_q.push_back(std::move(evidence_[i]));
    for (EntityId e = 0; e < facts_.num_entities(); ++e) {
      if (slot_[static_cast<std::size_t>(e)] < 0) out.b_q.push_back(e);
    }
    return out;
  }

 private:
  void descend(EntityId u) {
    const std::size_t depth = walk_.size() - 1;
    if (depth == steps_.size()) {
      record(u);
      return;
    }
    const auto& step = steps_[depth];
    for (EntityId v : facts_.neighbors(u, step.relation, step.direction)) {
      if (++visits_ > options_.max_visits_per_rule) return;
      if (std::find(walk_.begin(), walk_.end(), v) != walk_.end()) continue;
      walk_.push_back(v);
      descend(v);
      walk_.pop_back();
    }
  }

  void record(EntityId candidate) {
    auto& slot = slot_[static_cast<std::size_t>(candidate)];
    if (slot < 0) {
      slot = static_cast<int>(evidence_.size());
      evidence_.push_back({candidate, {}, {}, 0});
      last_rule_.push_back(static_cast<std::size_t>(-1));
    }
    auto& ev = evidence_[static_cast<std::size_t>(slot)];
    ++ev.total_matches;
    if (last_rule_[static_cast<std::size_t>(slot)] != rule_index_) {
      last_rule_[static_cast<std::size_t>(slot)] = rule_index_;
      ev.rule_confidences.push_back(confidence_);
    }
    // Rules arrive by descending confidence, so the cap keeps the best matches. Ties with the
    // last retained match are kept too, otherwise top-k with ties would depend on traversal order.
    if (ev.matches.size() >= options_.max_matches_per_candidate && ev.matches.back().confidence != confidence_) return;

    GroundRuleMatch m{rule_index_, confidence_, {}, walk_};
    if (query_.direction == QueryDirection::Head) std::reverse(m.path.begin(), m.path.end());
    m.body.reserve(original_->size());
    for (std::size_t i = 0; i < original_->size(); ++i) {
      const auto& a = (*original_)[i];
      m.body.push_back(a.direction == Direction::Forward ? Triple{m.path[i], a.relation, m.path[i + 1]}
                                                         : Triple{m.path[i + 1], a.relation, m.path[i]});
    }
    ev.matches.push_back(std::move(m));
  }

  const KnowledgeGraph& facts_;
  Query query_;
  ApplyOptions options_;
  std::vector<int> slot_;
  std::vector<Evidence> evidence_;
  std::vector<std::size_t> last_rule_;
  std::vector<BodyAtom> steps_;
  const std::vector<BodyAtom>* original_ = nullptr;
  std::vector<EntityId> walk_;
  std::size_t rule_index_ = 0;
  double confidence_ = 0.0;
  std::int64_t visits_ = 0;
};

}  // namespace

CandidatePartition apply_rules(const KnowledgeGraph& facts, const RuleSet& rules, const Query& q,
                               const ApplyOptions& options) {
  facts.check_entity(q.anchor);
  facts.check_relation(q.relation);
  RuleApplier applier(facts, q, options);
  for (std::size_t idx : rules.rules_for(q.relation)) {
    const auto& rule = rules.at(idx);
    for (const auto& a : rule.rule.body) facts.check_relation(a.relation);
    applier.apply(idx, rule);
  }
  return applier.finish();
}

namespace {

/// <0 when a ranks before b.
int compare_profiles(std::span<const double> a, std::span<const double> b) {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i] ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() > b.size() ? -1 : 1;
}

}  // namespace

std::vector<RankedEntry> rank_max_tiebreak(const CandidatePartition& partition) {
  std::vector<const Evidence*> order;
  order.reserve(partition.a_q.size());
  for (const auto& ev : partition.a_q) order.push_back(&ev);
  std::sort(order.begin(), order.end(), [](const Evidence* a, const Evidence* b) {
    int c = compare_profiles(a->rule_confidences, b->rule_confidences);
    return c != 0 ? c < 0 : a->candidate < b->candidate;
  });
  std::vector<RankedEntry> out;
  out.reserve(order.size());
  std::int32_t group = -1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || compare_profiles(order[i - 1]->rule_confidences, order[i]->rule_confidences) != 0) ++group;
    const auto& confs = order[i]->rule_confidences;
    out.push_back({order[i]->candidate, confs.empty() ? 0.0 : confs.front(), group});
  }
  return out;
}

double noisy_or(std::span<const double> confidences) {
  // Running form of 1 - prod(1 - c): exact for a single rule and never below the largest term.
  std::vector<double> c(confidences.begin(), confidences.end());
  std::sort(c.begin(), c.end(), std::greater<>());
  double s = 0.0;
  for (double x : c) s += (1.0 - s) * x;
  return s;
}

std::vector<RankedEntry> order_by_score(std::vector<RankedEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.score != b.score ? a.score > b.score : a.entity < b.entity;
  });
  std::int32_t group = -1;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i - 1].score != entries[i].score) ++group;
    entries[i].tie_group = group;
  }
  return entries;
}

std::vector<RankedEntry> rank_noisy_or(const CandidatePartition& partition) {
  std::vector<RankedEntry> entries;
  entries.reserve(partition.a_q.size());
  for (const auto& ev : partition.a_q) entries.push_back({ev.candidate, noisy_or(ev.rule_confidences), 0});
  return order_by_score(std::move(entries));
}

}  // namespace hkgc
