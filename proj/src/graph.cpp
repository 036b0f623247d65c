#include "hkgc/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace hkgc {

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  std::uint64_t h = static_cast<std::uint32_t>(t.head);
  h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(t.relation);
  h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(t.tail);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::int32_t Vocabulary::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<std::int32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::name(std::int32_t id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id out of range");
  return names_[static_cast<std::size_t>(id)];
}

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const Vocabulary> entities,
                               std::shared_ptr<const Vocabulary> relations,
                               std::vector<Triple> triples)
    : entities_(std::move(entities)), relations_(std::move(relations)), triples_(std::move(triples)) {
  if (!entities_ || !relations_) throw std::invalid_argument("KnowledgeGraph needs vocabularies");
  for (const auto& t : triples_) {
    check_entity(t.head);
    check_entity(t.tail);
    check_relation(t.relation);
  }
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

  const auto n = static_cast<std::size_t>(num_entities());
  for (int d = 0; d < 2; ++d) {
    // (source, relation, neighbor) keys for this direction
    std::vector<Triple> keyed;
    keyed.reserve(triples_.size());
    for (const auto& t : triples_) {
      keyed.push_back(d == 0 ? t : Triple{t.tail, t.relation, t.head});
    }
    std::sort(keyed.begin(), keyed.end());
    auto& off = offsets_[d];
    off.assign(n + 1, 0);
    for (const auto& k : keyed) ++off[static_cast<std::size_t>(k.head) + 1];
    for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
    edge_relations_[d].resize(keyed.size());
    edge_neighbors_[d].resize(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      edge_relations_[d][i] = keyed[i].relation;
      edge_neighbors_[d][i] = keyed[i].tail;
    }
  }
}

void KnowledgeGraph::check_entity(EntityId e) const {
  if (e < 0 || e >= num_entities()) throw std::out_of_range("entity id out of range");
}

void KnowledgeGraph::check_relation(RelationId r) const {
  if (r < 0 || r >= num_relations()) throw std::out_of_range("relation id out of range");
}

EdgeRange KnowledgeGraph::edges(EntityId e, Direction d) const {
  check_entity(e);
  const auto di = static_cast<std::size_t>(d);
  const auto lo = offsets_[di][static_cast<std::size_t>(e)];
  const auto hi = offsets_[di][static_cast<std::size_t>(e) + 1];
  return {std::span<const RelationId>(edge_relations_[di]).subspan(lo, hi - lo),
          std::span<const EntityId>(edge_neighbors_[di]).subspan(lo, hi - lo)};
}

std::span<const EntityId> KnowledgeGraph::neighbors(EntityId e, RelationId r, Direction d) const {
  check_relation(r);
  auto range = edges(e, d);
  auto [lo, hi] = std::equal_range(range.relations.begin(), range.relations.end(), r);
  auto first = static_cast<std::size_t>(lo - range.relations.begin());
  auto count = static_cast<std::size_t>(hi - lo);
  return range.neighbors.subspan(first, count);
}

std::size_t KnowledgeGraph::degree(EntityId e) const {
  return edges(e, Direction::Forward).size() + edges(e, Direction::Inverse).size();
}

bool KnowledgeGraph::contains(const Triple& t) const {
  if (t.head < 0 || t.head >= num_entities() || t.tail < 0 || t.tail >= num_entities() ||
      t.relation < 0 || t.relation >= num_relations()) {
    return false;
  }
  auto nb = neighbors(t.head, t.relation, Direction::Forward);
  return std::binary_search(nb.begin(), nb.end(), t.tail);
}

BoundedBfs::BoundedBfs(std::int32_t num_entities) : dist_(static_cast<std::size_t>(num_entities), -1) {}

void BoundedBfs::run(const KnowledgeGraph& kg, EntityId source, int cap) {
  kg.check_entity(source);
  for (auto e : touched_) dist_[static_cast<std::size_t>(e)] = -1;
  touched_.clear();
  if (cap < 0) return;
  dist_[static_cast<std::size_t>(source)] = 0;
  touched_.push_back(source);
  for (std::size_t head = 0; head < touched_.size(); ++head) {
    const EntityId u = touched_[head];
    const int du = dist_[static_cast<std::size_t>(u)];
    if (du >= cap) continue;
    for (auto d : {Direction::Forward, Direction::Inverse}) {
      for (EntityId v : kg.edges(u, d).neighbors) {
        auto& dv = dist_[static_cast<std::size_t>(v)];
        if (dv < 0) {
          dv = du + 1;
          touched_.push_back(v);
        }
      }
    }
  }
}

std::vector<int> bfs_distance(const KnowledgeGraph& kg, EntityId source, int cap) {
  if (cap < 0) throw std::invalid_argument("bfs cap must be non-negative");
  BoundedBfs bfs(kg.num_entities());
  bfs.run(kg, source, cap);
  std::vector<int> out(static_cast<std::size_t>(kg.num_entities()), overflow_distance(cap));
  for (EntityId e : bfs.reached()) out[static_cast<std::size_t>(e)] = bfs.distance(e);
  return out;
}

namespace {

using NamedTriple = std::array<std::string, 3>;

std::vector<NamedTriple> read_named_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<NamedTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, '\t')) fields.push_back(field);
    if (line.back() == '\t') fields.emplace_back();
    NamedTriple t;
    if (fields.size() == 3) t = {fields[0], fields[1], fields[2]};
    if (fields.size() != 3 || t[0].empty() || t[1].empty() || t[2].empty()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected head<TAB>relation<TAB>tail");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

DatasetBundle load_dataset_dirs(const std::filesystem::path& train_dir,
                                const std::filesystem::path& test_dir, std::string name) {
  static constexpr std::array<const char*, 3> kSplits = {"train.txt", "valid.txt", "test.txt"};
  std::array<std::vector<NamedTriple>, 3> train_raw, test_raw;
  for (std::size_t i = 0; i < 3; ++i) {
    train_raw[i] = read_named_triples(train_dir / kSplits[i]);
    test_raw[i] = read_named_triples(test_dir / kSplits[i]);
  }

  auto relations = std::make_shared<Vocabulary>();
  auto train_entities = std::make_shared<Vocabulary>();
  auto test_entities = std::make_shared<Vocabulary>();
  for (const auto& split : train_raw) {
    for (const auto& t : split) {
      train_entities->intern(t[0]);
      relations->intern(t[1]);
      train_entities->intern(t[2]);
    }
  }
  for (const auto& split : test_raw) {
    for (const auto& t : split) {
      if (!relations->find(t[1])) {
        throw DataError("relation '" + t[1] + "' in " + test_dir.string() + " does not occur in the training graph");
      }
      for (const auto* e : {&t[0], &t[2]}) {
        if (train_entities->find(*e)) {
          throw DataError("entity '" + *e + "' occurs in both the training and the test graph");
        }
        test_entities->intern(*e);
      }
    }
  }

  auto to_graph = [&](const std::vector<NamedTriple>& raw, const std::shared_ptr<Vocabulary>& ents) {
    std::vector<Triple> ts;
    ts.reserve(raw.size());
    for (const auto& t : raw) ts.push_back({*ents->find(t[0]), *relations->find(t[1]), *ents->find(t[2])});
    return KnowledgeGraph(ents, relations, std::move(ts));
  };
  return DatasetBundle{
      std::move(name), relations,
      GraphSplits{to_graph(train_raw[0], train_entities), to_graph(train_raw[1], train_entities),
                  to_graph(train_raw[2], train_entities)},
      GraphSplits{to_graph(test_raw[0], test_entities), to_graph(test_raw[1], test_entities),
                  to_graph(test_raw[2], test_entities)}};
}

DatasetBundle load_dataset(const std::filesystem::path& root, std::string_view dataset,
                           std::string_view version) {
  const std::string base = std::string(dataset) + "_" + std::string(version);
  return load_dataset_dirs(root / base, root / (base + "_ind"), base);
}

void write_triples(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& ev = kg.entity_vocab();
  const auto& rv = kg.relation_vocab();
  for (const auto& t : kg.triples()) {
    out << ev.name(t.head) << '\t' << rv.name(t.relation) << '\t' << ev.name(t.tail) << '\n';
  }
}

Triple complete(const Query& q, EntityId answer) {
  return q.direction == QueryDirection::Tail ? Triple{q.anchor, q.relation, answer}
                                             : Triple{answer, q.relation, q.anchor};
}

std::vector<EntityId> filter_set(const DatasetBundle& bundle, const Query& q, EntityId gold) {
  const auto& g = bundle.test_graph;
  g.train.check_entity(q.anchor);
  g.train.check_relation(q.relation);
  const Direction d = q.direction == QueryDirection::Tail ? Direction::Forward : Direction::Inverse;
  std::vector<EntityId> out;
  for (const auto* split : {&g.train, &g.valid, &g.test}) {
    for (EntityId e : split->neighbors(q.anchor, q.relation, d)) {
      if (e != gold) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace hkgc
