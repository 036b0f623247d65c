#include "hkgc/rules.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <unordered_set>

namespace hkgc {

std::size_t RuleHash::operator()(const ClosedPathRule& r) const noexcept {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(r.head));
  for (const auto& a : r.body) {
    h = splitmix64(h ^ (static_cast<std::uint64_t>(a.relation) << 1 | static_cast<std::uint64_t>(a.direction)));
  }
  return static_cast<std::size_t>(h);
}

bool rule_precedes(const ScoredRule& a, const ScoredRule& b) {
  if (a.stats.confidence != b.stats.confidence) return a.stats.confidence > b.stats.confidence;
  if (a.stats.support != b.stats.support) return a.stats.support > b.stats.support;
  if (a.rule.body.size() != b.rule.body.size()) return a.rule.body.size() < b.rule.body.size();
  if (a.rule.body != b.rule.body) return a.rule.body < b.rule.body;
  return a.rule.head < b.rule.head;
}

namespace {

bool stats_dominate(const RuleStats& candidate, const RuleStats& current) {
  if (current.estimated != candidate.estimated) return current.estimated;
  if (candidate.body_groundings != current.body_groundings) {
    return candidate.body_groundings > current.body_groundings;
  }
  return candidate.support > current.support;
}

}  // namespace

void RuleSet::place(std::size_t index) {
  const auto head = static_cast<std::size_t>(rules_[index].rule.head);
  if (by_head_.size() <= head) by_head_.resize(head + 1);
  auto& list = by_head_[head];
  auto pos = std::lower_bound(list.begin(), list.end(), index, [&](std::size_t lhs, std::size_t rhs) {
    return rule_precedes(rules_[lhs], rules_[rhs]);
  });
  list.insert(pos, index);
}

void RuleSet::insert(const ClosedPathRule& rule, const RuleStats& stats) {
  if (rule.head < 0) throw std::invalid_argument("rule head must be a valid relation id");
  auto it = lookup_.find(rule);
  if (it == lookup_.end()) {
    rules_.push_back({rule, stats});
    lookup_.emplace(rule, rules_.size() - 1);
    place(rules_.size() - 1);
    return;
  }
  const auto index = it->second;
  if (!stats_dominate(stats, rules_[index].stats)) return;
  auto& list = by_head_[static_cast<std::size_t>(rule.head)];
  list.erase(std::find(list.begin(), list.end(), index));
  rules_[index].stats = stats;
  place(index);
}

void RuleSet::merge(const RuleSet& other) {
  for (const auto& r : other.rules()) insert(r.rule, r.stats);
}

std::optional<std::size_t> RuleSet::find(const ClosedPathRule& rule) const {
  auto it = lookup_.find(rule);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> RuleSet::rules_for(RelationId head) const {
  if (head < 0 || static_cast<std::size_t>(head) >= by_head_.size()) return {};
  return by_head_[static_cast<std::size_t>(head)];
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

/// Depth-first join of a rule body with object identity (no entity repeats on a path).
class BodyJoin {
 public:
  BodyJoin(const KnowledgeGraph& kg, const std::vector<BodyAtom>& body)
      : kg_(kg), body_(body), stamp_(static_cast<std::size_t>(kg.num_entities()), 0) {}

  /// Collects distinct endpoints reachable from `start`. Returns false when the visit
  /// limit was hit before the join finished.
  bool endpoints_from(EntityId start, std::int64_t limit) {
    ++current_;
    endpoints_.clear();
    path_.assign(1, start);
    visits_ = 0;
    limit_ = limit;
    aborted_ = false;
    walk(start, 0);
    return !aborted_;
  }

  std::span<const EntityId> endpoints() const { return endpoints_; }
  std::int64_t visits() const { return visits_; }

 private:
  void walk(EntityId u, std::size_t depth) {
    if (depth == body_.size()) {
      auto& s = stamp_[static_cast<std::size_t>(u)];
      if (s != current_) {
        s = current_;
        endpoints_.push_back(u);
      }
      return;
    }
    const auto& atom = body_[depth];
    for (EntityId v : kg_.neighbors(u, atom.relation, atom.direction)) {
      if (++visits_ > limit_) {
        aborted_ = true;
        return;
      }
      if (std::find(path_.begin(), path_.end(), v) != path_.end()) continue;
      path_.push_back(v);
      walk(v, depth + 1);
      path_.pop_back();
      if (aborted_) return;
    }
  }

  const KnowledgeGraph& kg_;
  const std::vector<BodyAtom>& body_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t current_ = 0;
  std::vector<EntityId> endpoints_;
  std::vector<EntityId> path_;
  std::int64_t visits_ = 0;
  std::int64_t limit_ = 0;
  bool aborted_ = false;
};

std::vector<EntityId> join_starts(const KnowledgeGraph& kg, const BodyAtom& first) {
  std::vector<EntityId> starts;
  for (const auto& t : kg.triples()) {
    if (t.relation == first.relation) starts.push_back(first.direction == Direction::Forward ? t.head : t.tail);
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  return starts;
}

}  // namespace

RuleStats score_rule(const KnowledgeGraph& kg, const ClosedPathRule& rule, std::int64_t grounding_cap,
                     double pessimism) {
  RuleStats stats;
  if (rule.body.empty()) return stats;
  kg.check_relation(rule.head);
  for (const auto& a : rule.body) kg.check_relation(a.relation);

  const auto starts = join_starts(kg, rule.body.front());
  BodyJoin join(kg, rule.body);
  auto tally = [&](EntityId x, std::int64_t& support, std::int64_t& groundings) {
    for (EntityId y : join.endpoints()) {
      ++groundings;
      if (kg.contains({x, rule.head, y})) ++support;
    }
  };

  std::int64_t budget = grounding_cap;
  bool exact = true;
  for (EntityId x : starts) {
    if (!join.endpoints_from(x, budget)) {
      exact = false;
      break;
    }
    budget -= join.visits();
    tally(x, stats.support, stats.body_groundings);
  }

  if (!exact) {
    // Estimate from a random subset of start entities whose joins fit in the cap.
    Rng rng(RuleHash{}(rule));
    auto order = starts;
    std::shuffle(order.begin(), order.end(), rng);
    std::int64_t support = 0, groundings = 0, spent = 0;
    std::size_t completed = 0;
    for (EntityId x : order) {
      if (spent >= grounding_cap) break;
      bool done = join.endpoints_from(x, grounding_cap);
      spent += join.visits();
      if (!done) continue;
      ++completed;
      tally(x, support, groundings);
    }
    const double scale = completed == 0 ? 0.0 : static_cast<double>(starts.size()) / static_cast<double>(completed);
    stats.support = static_cast<std::int64_t>(static_cast<double>(support) * scale + 0.5);
    stats.body_groundings = static_cast<std::int64_t>(static_cast<double>(groundings) * scale + 0.5);
    stats.estimated = true;
  }

  const double denom = static_cast<double>(stats.body_groundings) + pessimism;
  stats.confidence = denom > 0.0 ? static_cast<double>(stats.support) / denom : 0.0;
  return stats;
}

// ---------------------------------------------------------------------------
// Sampling and generalization

std::optional<ClosedPathRule> generalize(const GroundPath& path, RelationId head, int max_len) {
  const auto n = path.atoms.size();
  if (n == 0 || n > static_cast<std::size_t>(max_len)) return std::nullopt;
  if (n == 1 && path.atoms[0] == BodyAtom{head, Direction::Forward}) return std::nullopt;
  return ClosedPathRule{head, path.atoms};
}

namespace {

struct StepChoice {
  BodyAtom atom;
  EntityId next;
};

std::optional<GroundPath> sample_with(const KnowledgeGraph& kg, int max_len, Rng& rng, int retries,
                                      BoundedBfs& bfs, std::vector<StepChoice>& choices) {
  if (kg.empty()) throw std::invalid_argument("cannot sample paths from an empty graph");
  std::uniform_int_distribution<std::size_t> pick_triple(0, kg.size() - 1);
  std::uniform_int_distribution<int> pick_len(1, std::max(1, max_len));
  for (int attempt = 0; attempt < retries; ++attempt) {
    const Triple head = kg.triples()[pick_triple(rng)];
    const int n = pick_len(rng);
    bfs.run(kg, head.tail, n);
    if (bfs.distance(head.head) < 0) continue;

    GroundPath path{head, {head.head}, {}};
    bool ok = true;
    for (int step = 0; step < n && ok; ++step) {
      const int remaining = n - step - 1;
      const EntityId u = path.entities.back();
      choices.clear();
      for (auto d : {Direction::Forward, Direction::Inverse}) {
        auto range = kg.edges(u, d);
        for (std::size_t i = 0; i < range.size(); ++i) {
          const EntityId v = range.neighbors[i];
          const int dv = bfs.distance(v);
          if (dv < 0 || dv > remaining) continue;
          if (remaining == 0 ? v != head.tail : v == head.tail) continue;
          if (std::find(path.entities.begin(), path.entities.end(), v) != path.entities.end()) continue;
          choices.push_back({{range.relations[i], d}, v});
        }
      }
      if (choices.empty()) {
        ok = false;
        break;
      }
      const auto& c = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
      path.atoms.push_back(c.atom);
      path.entities.push_back(c.next);
    }
    if (ok) return path;
  }
  return std::nullopt;
}

void enumerate_paths(const KnowledgeGraph& kg, EntityId target, int max_len, std::vector<EntityId>& entities,
                     std::vector<BodyAtom>& atoms, const std::function<void()>& emit) {
  const EntityId u = entities.back();
  for (auto d : {Direction::Forward, Direction::Inverse}) {
    auto range = kg.edges(u, d);
    for (std::size_t i = 0; i < range.size(); ++i) {
      const EntityId v = range.neighbors[i];
      if (std::find(entities.begin(), entities.end(), v) != entities.end()) continue;
      atoms.push_back({range.relations[i], d});
      entities.push_back(v);
      if (v == target) {
        emit();
      } else if (static_cast<int>(atoms.size()) < max_len) {
        enumerate_paths(kg, target, max_len, entities, atoms, emit);
      }
      entities.pop_back();
      atoms.pop_back();
    }
  }
}

}  // namespace

std::optional<GroundPath> sample_ground_path(const KnowledgeGraph& kg, int max_len, Rng& rng, int retries) {
  BoundedBfs bfs(kg.num_entities());
  std::vector<StepChoice> choices;
  return sample_with(kg, max_len, rng, retries, bfs, choices);
}

RuleSet mine(const KnowledgeGraph& kg, const MineOptions& options) {
  if (kg.empty()) throw std::invalid_argument("cannot mine rules from an empty graph");
  if (options.max_len < 1 || options.max_len > 8) throw std::invalid_argument("max_len must be in [1, 8]");
  if (!options.exhaustive && !options.iterations && !(options.budget_seconds > 0.0)) {
    throw std::invalid_argument("mining budget must be positive");
  }

  RuleSet out(kg.num_relations());
  std::unordered_set<ClosedPathRule, RuleHash> seen;
  auto consider = [&](const ClosedPathRule& rule) {
    if (!seen.insert(rule).second) return;
    auto stats = score_rule(kg, rule, options.grounding_cap, options.pessimism);
    if (stats.confidence > options.min_confidence && stats.support >= options.min_support) {
      out.insert(rule, stats);
    }
  };

  if (options.exhaustive) {
    std::vector<EntityId> entities;
    std::vector<BodyAtom> atoms;
    for (const auto& t : kg.triples()) {
      entities.assign(1, t.head);
      atoms.clear();
      if (t.head == t.tail) continue;
      enumerate_paths(kg, t.tail, options.max_len, entities, atoms, [&] {
        GroundPath p{t, entities, atoms};
        if (auto rule = generalize(p, t.relation, options.max_len)) consider(*rule);
      });
    }
    return out;
  }

  Rng rng(options.seed);
  BoundedBfs bfs(kg.num_entities());
  std::vector<StepChoice> choices;
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(options.budget_seconds));
  for (std::int64_t i = 0;; ++i) {
    if (options.iterations) {
      if (i >= *options.iterations) break;
    } else if (std::chrono::steady_clock::now() >= deadline) {
      break;
    }
    auto path = sample_with(kg, options.max_len, rng, 1, bfs, choices);
    if (!path) continue;
    if (auto rule = generalize(*path, path->head.relation, options.max_len)) consider(*rule);
  }
  return out;
}

}  // namespace hkgc
