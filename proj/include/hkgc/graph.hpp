#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hkgc {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

enum class Direction : std::uint8_t { Forward = 0, Inverse = 1 };

constexpr Direction flip(Direction d) {
  return d == Direction::Forward ? Direction::Inverse : Direction::Forward;
}

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

/// Raised for malformed or inconsistent benchmark files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name <-> dense id bijection.
class Vocabulary {
 public:
  std::int32_t intern(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t id) const;
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

/// All incident edges of one entity in one direction, sorted by (relation, neighbor).
struct EdgeRange {
  std::span<const RelationId> relations;
  std::span<const EntityId> neighbors;
  std::size_t size() const { return neighbors.size(); }
};

/// Immutable triple store with a (entity, relation, direction) adjacency index.
///
/// Inverse relations are addressed with Direction::Inverse; neighbor lists are
/// sorted ascending so that every traversal is deterministic.
class KnowledgeGraph {
 public:
  KnowledgeGraph(std::shared_ptr<const Vocabulary> entities,
                 std::shared_ptr<const Vocabulary> relations,
                 std::vector<Triple> triples);

  std::int32_t num_entities() const { return entities_->size(); }
  std::int32_t num_relations() const { return relations_->size(); }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  /// Deduplicated triples in ascending (head, relation, tail) order.
  std::span<const Triple> triples() const { return triples_; }

  std::span<const EntityId> neighbors(EntityId e, RelationId r, Direction d) const;
  EdgeRange edges(EntityId e, Direction d) const;
  std::size_t degree(EntityId e) const;
  bool contains(const Triple& t) const;

  const Vocabulary& entity_vocab() const { return *entities_; }
  const Vocabulary& relation_vocab() const { return *relations_; }
  std::shared_ptr<const Vocabulary> shared_entities() const { return entities_; }
  std::shared_ptr<const Vocabulary> shared_relations() const { return relations_; }

  void check_entity(EntityId e) const;
  void check_relation(RelationId r) const;

 private:
  std::shared_ptr<const Vocabulary> entities_;
  std::shared_ptr<const Vocabulary> relations_;
  std::vector<Triple> triples_;
  std::array<std::vector<std::size_t>, 2> offsets_;
  std::array<std::vector<RelationId>, 2> edge_relations_;
  std::array<std::vector<EntityId>, 2> edge_neighbors_;
};

/// Distance value reported for nodes that are unreachable or farther than the cap.
constexpr int overflow_distance(int cap) { return cap + 1; }

/// Relation-agnostic undirected BFS from `source`; entries above `cap` are
/// reported as overflow_distance(cap).
std::vector<int> bfs_distance(const KnowledgeGraph& kg, EntityId source, int cap);

/// Reusable bounded BFS over the undirected skeleton. Only touched entries are
/// reset between runs, which keeps per-call cost proportional to the ball size.
class BoundedBfs {
 public:
  explicit BoundedBfs(std::int32_t num_entities);

  void run(const KnowledgeGraph& kg, EntityId source, int cap);
  /// Distance of `e` from the last source, or -1 when outside the cap.
  int distance(EntityId e) const { return dist_[static_cast<std::size_t>(e)]; }
  std::span<const EntityId> reached() const { return touched_; }

 private:
  std::vector<int> dist_;
  std::vector<EntityId> touched_;
};

struct GraphSplits {
  KnowledgeGraph train;
  KnowledgeGraph valid;
  KnowledgeGraph test;
};

/// Inductive benchmark: a training graph and an entity-disjoint test graph,
/// each with train/valid/test splits, sharing one relation vocabulary.
struct DatasetBundle {
  std::string name;
  std::shared_ptr<const Vocabulary> relations;
  GraphSplits train_graph;
  GraphSplits test_graph;
};

DatasetBundle load_dataset(const std::filesystem::path& root, std::string_view dataset,
                           std::string_view version);

/// Loads a bundle from two explicit split directories.
DatasetBundle load_dataset_dirs(const std::filesystem::path& train_dir,
                                const std::filesystem::path& test_dir, std::string name);

void write_triples(const KnowledgeGraph& kg, const std::filesystem::path& path);

enum class QueryDirection : std::uint8_t { Tail = 0, Head = 1 };

/// (anchor, relation, ?) for tail queries, (?, relation, anchor) for head queries.
struct Query {
  EntityId anchor = 0;
  RelationId relation = 0;
  QueryDirection direction = QueryDirection::Tail;

  friend bool operator==(const Query&, const Query&) = default;
};

Triple complete(const Query& q, EntityId answer);

/// Relation id used when inverse relations are materialized: r or r + |R|.
constexpr std::int32_t materialized_relation(RelationId r, Direction d, std::int32_t num_relations) {
  return d == Direction::Forward ? r : r + num_relations;
}

/// Entities other than `gold` that complete `q` to a triple in any test-graph split (sorted).
std::vector<EntityId> filter_set(const DatasetBundle& bundle, const Query& q, EntityId gold);

}  // namespace hkgc
