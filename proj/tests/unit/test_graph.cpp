#include <fstream>
#include <set>
#include <tuple>

#include "doctest.h"
#include "../oracles.hpp"
#include "hkgc/graph.hpp"

using namespace hkgc;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

void write_bundle(const std::filesystem::path& root, const std::string& train, const std::string& test,
                  const std::string& train_valid = "", const std::string& test_test = "b0\tr\tb2\n") {
  write_file(root / "toy_v1" / "train.txt", train);
  write_file(root / "toy_v1" / "valid.txt", train_valid);
  write_file(root / "toy_v1" / "test.txt", "");
  write_file(root / "toy_v1_ind" / "train.txt", test);
  write_file(root / "toy_v1_ind" / "valid.txt", "");
  write_file(root / "toy_v1_ind" / "test.txt", test_test);
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("neighbors follow the triple list in both directions") {
  // a=0 b=1 c=2
  const auto kg = oracle::make_kg(3, 1, {{0, 0, 1}, {0, 0, 2}});
  auto n = kg.neighbors(0, 0, Direction::Forward);
  CHECK(std::vector<EntityId>(n.begin(), n.end()) == std::vector<EntityId>{1, 2});
  CHECK(kg.neighbors(1, 0, Direction::Forward).empty());
  n = kg.neighbors(1, 0, Direction::Inverse);
  CHECK(std::vector<EntityId>(n.begin(), n.end()) == std::vector<EntityId>{0});
  CHECK_THROWS_AS(kg.neighbors(7, 0, Direction::Forward), std::out_of_range);
}

TEST_CASE("duplicate triples collapse") {
  const auto kg = oracle::make_kg(2, 1, {{0, 0, 1}, {0, 0, 1}});
  CHECK(kg.size() == 1);
  CHECK(kg.degree(0) == 1);
}

TEST_CASE("adjacency agrees with the triple list on random graphs") {
  Rng rng(11);
  for (int g = 0; g < 20; ++g) {
    const auto kg = oracle::random_kg(rng, 15, 3, 60);
    std::size_t edges = 0;
    for (EntityId e = 0; e < kg.num_entities(); ++e) {
      for (RelationId r = 0; r < kg.num_relations(); ++r) {
        const auto fwd = kg.neighbors(e, r, Direction::Forward);
        CHECK(std::is_sorted(fwd.begin(), fwd.end()));
        for (EntityId y : fwd) CHECK(kg.contains({e, r, y}));
        edges += fwd.size();
      }
    }
    CHECK(edges == kg.size());
    for (const auto& t : kg.triples()) {
      const auto inv = kg.neighbors(t.tail, t.relation, Direction::Inverse);
      CHECK(std::binary_search(inv.begin(), inv.end(), t.head));
    }
  }
}

TEST_CASE("bfs distances") {
  // chain 0-1-2, isolated 3
  const auto kg = oracle::make_kg(4, 1, {{0, 0, 1}, {2, 0, 1}});
  const auto d = bfs_distance(kg, 0, 5);
  CHECK(d[0] == 0);
  CHECK(d[2] == 2);
  CHECK(d[3] == overflow_distance(5));
  CHECK(bfs_distance(kg, 0, 1)[2] == overflow_distance(1));

  Rng rng(5);
  for (int g = 0; g < 10; ++g) {
    const auto r = oracle::random_kg(rng, 30, 2, 40);
    const auto dist = bfs_distance(r, 0, 5);
    BoundedBfs bounded(r.num_entities());
    bounded.run(r, 0, 5);
    for (const auto& t : r.triples()) {
      const int a = dist[static_cast<std::size_t>(t.head)], b = dist[static_cast<std::size_t>(t.tail)];
      if (a <= 5 && b <= 5) CHECK(std::abs(a - b) <= 1);
    }
    for (EntityId e = 0; e < r.num_entities(); ++e) {
      const int expect = dist[static_cast<std::size_t>(e)] > 5 ? -1 : dist[static_cast<std::size_t>(e)];
      CHECK(bounded.distance(e) == expect);
    }
  }
}

TEST_CASE("dataset loading") {
  const auto root = oracle::temp_dir("load");
  write_bundle(root, "a0\tr\ta1\na1\ts\ta2\na0\tr\ta1\n", "b0\tr\tb1\nb1\ts\tb2\n");
  const auto b = load_dataset(root, "toy", "v1");
  CHECK(b.train_graph.train.size() == 2);
  CHECK(b.train_graph.valid.empty());
  CHECK(b.relations->size() == 2);
  CHECK(b.test_graph.test.size() == 1);
  CHECK(b.test_graph.train.num_entities() == 3);

  SUBCASE("round trip") {
    auto named = [](const KnowledgeGraph& kg) {
      std::set<std::tuple<std::string, std::string, std::string>> out;
      for (const auto& t : kg.triples()) {
        out.insert({kg.entity_vocab().name(t.head), kg.relation_vocab().name(t.relation), kg.entity_vocab().name(t.tail)});
      }
      return out;
    };
    write_triples(b.test_graph.train, root / "toy_v1_ind" / "train.txt");
    const auto again = load_dataset(root, "toy", "v1");
    CHECK(named(again.test_graph.train) == named(b.test_graph.train));
  }
  SUBCASE("malformed line") {
    write_bundle(root, "a0\tr\n", "b0\tr\tb1\n");
    CHECK_THROWS_AS(load_dataset(root, "toy", "v1"), DataError);
  }
  SUBCASE("unknown relation in the test graph") {
    write_bundle(root, "a0\tr\ta1\n", "b0\tq\tb1\n", "", "");
    CHECK_THROWS_AS(load_dataset(root, "toy", "v1"), DataError);
  }
  SUBCASE("shared entities") {
    write_bundle(root, "a0\tr\ta1\n", "a0\tr\tb1\n", "", "");
    CHECK_THROWS_AS(load_dataset(root, "toy", "v1"), DataError);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(root / "toy_v1_ind" / "valid.txt");
    CHECK_THROWS(load_dataset(root, "toy", "v1"));
  }
  std::filesystem::remove_all(root);
}

TEST_CASE("filter sets") {
  const auto root = oracle::temp_dir("filter");
  write_bundle(root, "a0\tr\ta1\n", "b0\tr\tb1\nb0\tr\tb2\n", "", "b0\tr\tb3\n");
  const auto b = load_dataset(root, "toy", "v1");
  const auto& ents = b.test_graph.train.entity_vocab();
  const EntityId b0 = *ents.find("b0"), b1 = *ents.find("b1"), b2 = *ents.find("b2"), b3 = *ents.find("b3");
  const Query q{b0, 0, QueryDirection::Tail};
  CHECK(filter_set(b, q, b1) == std::vector<EntityId>{std::min(b2, b3), std::max(b2, b3)});
  CHECK(filter_set(b, Query{b1, 0, QueryDirection::Tail}, b0).empty());
  CHECK(filter_set(b, Query{b1, 0, QueryDirection::Head}, b0).empty());
  std::filesystem::remove_all(root);
}

}
