#include "doctest.h"
#include "../oracles.hpp"
#include "hkgc/hybrid.hpp"

using namespace hkgc;

namespace {

std::vector<EntityId> entities(const HybridRanking& r) {
  std::vector<EntityId> out;
  for (const auto& e : r.entries) out.push_back(e.entity);
  return out;
}

Evidence evidence(EntityId e, std::vector<double> confs) {
  Evidence ev;
  ev.candidate = e;
  ev.rule_confidences = std::move(confs);
  return ev;
}

}  // namespace

TEST_SUITE("hybrid") {

TEST_CASE("compose") {
  const std::vector<RankedEntry> x{{0, 1.0, 0}}, yz{{1, 0.5, 0}, {2, 0.5, 0}};
  const auto r = compose(x, yz);
  CHECK(entities(r) == std::vector<EntityId>{0, 1, 2});
  CHECK(r.entries[0].provenance == Provenance::A);
  CHECK(r.entries[2].provenance == Provenance::B);
  CHECK(r.entries[0].tie_group != r.entries[1].tie_group);
  CHECK(r.entries[1].tie_group == r.entries[2].tie_group);
  CHECK(compose({}, {}).entries.empty());
  CHECK_THROWS(compose(x, x));
}

TEST_CASE("strategy names") {
  CHECK(StrategySpec::parse("anyburl-max+shuffle") == StrategySpec{Primary::AnyburlMax, Fallback::Shuffle});
  CHECK(StrategySpec::parse("compgcn+nbf").name() == "compgcn+nbfnet");
  CHECK(StrategySpec::parse("nbf+nbfnet").primary == Primary::Nbf);
  CHECK(StrategySpec::parse("noisy-or+shuffle").needs_nbf() == false);
  CHECK_THROWS(StrategySpec::parse("anyburl-max"));
  CHECK_THROWS(StrategySpec::parse("gat+shuffle"));
  CHECK_THROWS(StrategySpec::parse("rgcn+random"));
  const auto all = all_strategies();
  CHECK(all.size() == 10);
  for (const auto& s : all) CHECK(StrategySpec::parse(s.name()) == s);
}

// a=0 b=1 c=2 d=3 e=4
TEST_CASE("run strategy on a hand partition") {
  const auto kg = oracle::make_kg(5, 1, {{0, 0, 1}});
  CandidatePartition p;
  p.a_q = {evidence(0, {0.9}), evidence(1, {0.4})};
  p.b_q = {2, 3, 4};
  const Query q{0, 0, QueryDirection::Tail};
  Rng rng(query_seed(1, 0, q));
  const auto r = run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Shuffle}, {}, &rng);
  REQUIRE(r.entries.size() == 5);
  CHECK(r.entries[0].entity == 0);
  CHECK(r.entries[1].entity == 1);
  std::set<std::int32_t> groups;
  for (const auto& e : r.entries) groups.insert(e.tie_group);
  CHECK(groups.size() == 5);

  NbfConfig c;
  c.layers = 2;
  c.dim = 4;
  const NbfRanker nbf(c, 1);
  Models models;
  models.nbf = &nbf;
  const auto with_nbf = run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Nbf}, models, nullptr);
  const auto order = entities(with_nbf);
  CHECK(std::vector<EntityId>(order.begin(), order.begin() + 2) == std::vector<EntityId>{0, 1});

  CandidatePartition empty;
  empty.b_q = {0, 1, 2, 3, 4};
  Rng a(7), b(7);
  const auto only_b = run_strategy(kg, q, empty, {Primary::NoisyOr, Fallback::Shuffle}, {}, &a);
  CHECK(entities(only_b) == entities(compose({}, fallback_order(empty, Fallback::Shuffle, nullptr, &b))));
  for (const auto& e : only_b.entries) CHECK(e.provenance == Provenance::B);

  CHECK_THROWS(run_strategy(kg, q, p, {Primary::Rgcn, Fallback::Shuffle}, {}, &rng));
  CHECK_THROWS(run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Nbf}, {}, &rng));
  CHECK_THROWS(run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Shuffle}, {}, nullptr));
}

TEST_CASE("fallback never touches the A prefix") {
  Rng g(3);
  const auto kg = oracle::random_kg(g, 20, 2, 50);
  MineOptions o;
  o.exhaustive = true;
  o.max_len = 2;
  o.min_support = 1;
  const auto rules = mine(kg, o);
  NbfConfig c;
  c.layers = 2;
  c.dim = 4;
  const NbfRanker nbf(c, 2);
  Models models;
  models.nbf = &nbf;
  for (EntityId x = 0; x < 20; ++x) {
    const Query q{x, 1, QueryDirection::Tail};
    const auto p = apply_rules(kg, rules, q);
    Rng rng(query_seed(0, 0, q));
    const auto shuffled = run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Shuffle}, models, &rng);
    const auto reranked = run_strategy(kg, q, p, {Primary::AnyburlMax, Fallback::Nbf}, models, nullptr);
    const auto n = static_cast<std::ptrdiff_t>(p.a_q.size());
    CHECK(std::equal(shuffled.entries.begin(), shuffled.entries.begin() + n, reranked.entries.begin(),
                     [](const HybridEntry& a, const HybridEntry& b) { return a.entity == b.entity; }));
    CHECK(shuffled.entries.size() == 20);
    CHECK(reranked.entries.size() == 20);
  }
}

TEST_CASE("query seeds") {
  const Query q{3, 1, QueryDirection::Tail};
  CHECK(query_seed(5, 0, q) == query_seed(5, 0, q));
  CHECK(query_seed(5, 0, q) != query_seed(5, 1, q));
  CHECK(query_seed(5, 0, q) != query_seed(5, 0, Query{3, 1, QueryDirection::Head}));
  CHECK(query_seed(5, 0, q) != query_seed(6, 0, q));
}

}
