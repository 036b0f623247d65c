#include "doctest.h"
#include "../oracles.hpp"
#include "hkgc/rule_engine.hpp"

using namespace hkgc;

namespace {

Evidence evidence(EntityId e, std::vector<double> confs) {
  Evidence ev;
  ev.candidate = e;
  ev.rule_confidences = std::move(confs);
  return ev;
}

std::vector<EntityId> entities(const std::vector<RankedEntry>& r) {
  std::vector<EntityId> out;
  for (const auto& e : r) out.push_back(e.entity);
  return out;
}

}  // namespace

TEST_SUITE("engine") {

// a=0 b=1 c=2 d=3; r=0 s=1 h=2
TEST_CASE("partition on a hand example") {
  const auto kg = oracle::make_kg(4, 3, {{0, 0, 1}, {1, 1, 2}});
  RuleSet rules(3);
  rules.insert({2, {{0, Direction::Forward}, {1, Direction::Forward}}}, {1, 2, 0.5, false});

  auto p = apply_rules(kg, rules, {0, 2, QueryDirection::Tail});
  REQUIRE(p.a_q.size() == 1);
  CHECK(p.a_q[0].candidate == 2);
  CHECK(p.a_q[0].matches.size() == 1);
  CHECK(p.a_q[0].matches[0].body == std::vector<Triple>{{0, 0, 1}, {1, 1, 2}});
  CHECK(p.b_q == std::vector<EntityId>{0, 1, 3});

  p = apply_rules(kg, rules, {2, 2, QueryDirection::Head});
  REQUIRE(p.a_q.size() == 1);
  CHECK(p.a_q[0].candidate == 0);

  p = apply_rules(kg, rules, {0, 0, QueryDirection::Tail});
  CHECK(p.a_q.empty());
  CHECK(p.b_q.size() == 4);
  CHECK(p.find(2) == nullptr);
}

TEST_CASE("max with tie breaking") {
  CandidatePartition p;
  p.a_q = {evidence(1, {0.9}), evidence(2, {0.8})};
  CHECK(entities(rank_max_tiebreak(p)) == std::vector<EntityId>{1, 2});
  p.a_q = {evidence(1, {0.9, 0.3}), evidence(2, {0.9, 0.7})};
  CHECK(entities(rank_max_tiebreak(p)) == std::vector<EntityId>{2, 1});
  p.a_q = {evidence(1, {0.9}), evidence(2, {0.9, 0.1})};
  CHECK(entities(rank_max_tiebreak(p)) == std::vector<EntityId>{2, 1});
  p.a_q = {evidence(4, {0.5, 0.2}), evidence(3, {0.5, 0.2})};
  const auto r = rank_max_tiebreak(p);
  CHECK(entities(r) == std::vector<EntityId>{3, 4});
  CHECK(r[0].tie_group == r[1].tie_group);
}

TEST_CASE("noisy-or") {
  const std::vector<double> half{0.5, 0.5};
  CHECK(noisy_or(half) == doctest::Approx(0.75));
  const std::vector<double> one{0.3};
  CHECK(noisy_or(one) == 0.3);
  const std::vector<double> sure{1.0, 0.2};
  CHECK(noisy_or(sure) == 1.0);
  Rng rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> c(1 + i % 6);
    for (auto& x : c) x = u(rng);
    CHECK(noisy_or(c) >= *std::max_element(c.begin(), c.end()));
    CHECK(noisy_or(c) <= 1.0);
  }
}

TEST_CASE("retention keeps every match tied with the cap boundary") {
  // star: 0 -r-> m_i -s-> 1 for 6 middles, plus 0 -s-> n -s-> 1
  std::vector<Triple> t;
  for (EntityId m = 2; m < 8; ++m) {
    t.push_back({0, 0, m});
    t.push_back({m, 1, 1});
  }
  t.push_back({0, 1, 8});
  t.push_back({8, 1, 1});
  const auto kg = oracle::make_kg(9, 3, t);
  RuleSet rules(3);
  rules.insert({2, {{0, Direction::Forward}, {1, Direction::Forward}}}, {1, 1, 0.6, false});
  rules.insert({2, {{1, Direction::Forward}, {1, Direction::Forward}}}, {1, 1, 0.4, false});
  ApplyOptions o;
  o.max_matches_per_candidate = 2;
  const auto p = apply_rules(kg, rules, {0, 2, QueryDirection::Tail}, o);
  const auto* ev = p.find(1);
  REQUIRE(ev);
  CHECK(ev->total_matches == 7);
  CHECK(ev->matches.size() == 6);
  for (const auto& m : ev->matches) CHECK(m.confidence == 0.6);
  CHECK(ev->rule_confidences == std::vector<double>{0.6, 0.4});
  CHECK(covering_top_k(500).max_matches_per_candidate == 500);
  CHECK(covering_top_k(5).max_matches_per_candidate == 100);
}

TEST_CASE("candidate sets agree with the brute-force applier") {
  Rng rng(21);
  for (int g = 0; g < 10; ++g) {
    const auto kg = oracle::random_kg(rng, 12, 3, 40);
    MineOptions o;
    o.exhaustive = true;
    o.max_len = 3;
    o.pessimism = 0;
    o.min_support = 1;
    o.min_confidence = 0;
    const auto rules = mine(kg, o);
    for (EntityId a = 0; a < kg.num_entities(); a += 3) {
      for (auto dir : {QueryDirection::Tail, QueryDirection::Head}) {
        const Query q{a, 0, dir};
        ApplyOptions unlimited;
        unlimited.max_matches_per_candidate = 1 << 30;
        const auto p = apply_rules(kg, rules, q, unlimited);
        const auto oracle_matches = oracle::apply(kg, rules, q);
        REQUIRE(p.a_q.size() == oracle_matches.size());
        for (const auto& ev : p.a_q) {
          REQUIRE(oracle_matches.count(ev.candidate));
          CHECK(static_cast<std::size_t>(ev.total_matches) == oracle_matches.at(ev.candidate).size());
        }
        CHECK(p.a_q.size() + p.b_q.size() == static_cast<std::size_t>(kg.num_entities()));
      }
    }
  }
}

}
