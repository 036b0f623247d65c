#include <sstream>

#include "doctest.h"
#include "../oracles.hpp"
#include "hkgc/rules.hpp"

using namespace hkgc;

namespace {

constexpr BodyAtom fwd(RelationId r) { return {r, Direction::Forward}; }
constexpr BodyAtom inv(RelationId r) { return {r, Direction::Inverse}; }

MineOptions exhaustive(int max_len) {
  MineOptions o;
  o.exhaustive = true;
  o.max_len = max_len;
  o.pessimism = 0;
  o.min_support = 1;
  o.min_confidence = 0;
  o.grounding_cap = std::numeric_limits<std::int64_t>::max();
  return o;
}

}  // namespace

TEST_SUITE("rules") {

// relations: 0=r 1=s 2=h
TEST_CASE("rule scoring") {
  // a=0 b=1 c=2 d=3 e=4 f=5
  const auto kg = oracle::make_kg(6, 3, {{0, 0, 1}, {1, 1, 2}, {0, 2, 2}, {3, 0, 4}, {4, 1, 5}});
  const ClosedPathRule rule{2, {fwd(0), fwd(1)}};
  auto st = score_rule(kg, rule, 100000, 0);
  CHECK(st.support == 1);
  CHECK(st.body_groundings == 2);
  CHECK(st.confidence == doctest::Approx(0.5));
  CHECK_FALSE(st.estimated);
  CHECK(score_rule(kg, rule, 100000, 5).confidence == doctest::Approx(1.0 / 7));

  st = score_rule(kg, ClosedPathRule{2, {fwd(1), fwd(0)}}, 100000, 5);
  CHECK(st.support == 0);
  CHECK(st.body_groundings == 0);
  CHECK(st.confidence == 0.0);
}

TEST_CASE("exhaustive mining finds the composition") {
  const auto kg = oracle::make_kg(3, 3, {{0, 0, 1}, {1, 1, 2}, {0, 2, 2}});
  const auto rules = mine(kg, exhaustive(2));
  const auto idx = rules.find(ClosedPathRule{2, {fwd(0), fwd(1)}});
  REQUIRE(idx);
  CHECK(rules.at(*idx).stats.confidence == 1.0);
  for (const auto& sr : rules.rules()) {
    CHECK_FALSE((sr.rule.body.size() == 1 && sr.rule.body[0] == fwd(sr.rule.head)));
  }
}

TEST_CASE("mining budgets") {
  const auto kg = oracle::make_kg(3, 3, {{0, 0, 1}, {1, 1, 2}, {0, 2, 2}});
  MineOptions o;
  o.iterations = 0;
  CHECK(mine(kg, o).empty());
  o.iterations = 200;
  o.seed = 3;
  const auto a = mine(kg, o), b = mine(kg, o);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.at(i).rule == b.at(i).rule);
  CHECK_THROWS(mine(oracle::make_kg(1, 1, {}), o));
  o.max_len = 9;
  CHECK_THROWS(mine(kg, o));
}

TEST_CASE("path sampling and generalization") {
  // h(a,b) r(a,c) s(c,b); a=0 b=1 c=2
  const auto kg = oracle::make_kg(3, 3, {{0, 2, 1}, {0, 0, 2}, {2, 1, 1}});
  Rng rng(1);
  std::set<std::vector<BodyAtom>> seen;
  for (int i = 0; i < 300; ++i) {
    auto p = sample_ground_path(kg, 2, rng);
    if (!p) continue;
    CHECK(p->entities.front() == p->head.head);
    CHECK(p->entities.back() == p->head.tail);
    CHECK(p->entities.size() == p->atoms.size() + 1);
    if (p->head == Triple{0, 2, 1}) seen.insert(p->atoms);
  }
  CHECK(seen.count({fwd(0), fwd(1)}) == 1);

  CHECK_FALSE(generalize(GroundPath{{0, 2, 1}, {0, 1}, {fwd(2)}}, 2, 4));
  CHECK(generalize(GroundPath{{0, 2, 1}, {0, 1}, {inv(2)}}, 2, 4));
  const auto r1 = generalize(GroundPath{{0, 2, 1}, {0, 2, 1}, {fwd(0), fwd(1)}}, 2, 4);
  const auto r2 = generalize(GroundPath{{5, 2, 6}, {5, 7, 6}, {fwd(0), fwd(1)}}, 2, 4);
  REQUIRE(r1);
  CHECK(*r1 == *r2);
  CHECK(*r1 == ClosedPathRule{2, {fwd(0), fwd(1)}});
  CHECK_FALSE(generalize(GroundPath{{0, 2, 1}, {0, 2, 1}, {fwd(0), fwd(1)}}, 2, 1));
}

TEST_CASE("single triple graph yields no rules") {
  const auto kg = oracle::make_kg(2, 1, {{0, 0, 1}});
  CHECK(mine(kg, exhaustive(3)).empty());
}

TEST_CASE("rule set ordering and merge") {
  RuleSet set(3);
  set.insert({2, {fwd(0)}}, {3, 10, 0.3, false});
  set.insert({2, {fwd(1)}}, {5, 10, 0.5, false});
  set.insert({2, {fwd(0), fwd(1)}}, {5, 10, 0.5, false});
  set.insert({2, {fwd(0)}}, {4, 10, 0.4, false});
  CHECK(set.size() == 3);
  const auto order = set.rules_for(2);
  REQUIRE(order.size() == 3);
  CHECK(set.at(order[0]).rule.body.size() == 1);
  CHECK(set.at(order[1]).rule.body.size() == 2);
  CHECK(set.at(order[2]).stats.confidence == 0.4);
  CHECK(set.rules_for(0).empty());

  Rng rng(2);
  const auto kg = oracle::random_kg(rng, 12, 3, 40);
  auto once = mine(kg, exhaustive(3));
  auto twice = mine(kg, exhaustive(3));
  twice.merge(mine(kg, exhaustive(3)));
  REQUIRE(once.size() == twice.size());
  for (const auto& sr : once.rules()) {
    const auto j = twice.find(sr.rule);
    REQUIRE(j);
    CHECK(twice.at(*j).stats.confidence == sr.stats.confidence);
  }
}

TEST_CASE("adding a completing triple never lowers support") {
  Rng rng(9);
  for (int g = 0; g < 10; ++g) {
    const auto kg = oracle::random_kg(rng, 10, 2, 25);
    const auto rules = mine(kg, exhaustive(2));
    std::vector<Triple> more(kg.triples().begin(), kg.triples().end());
    more.push_back({0, 0, 9});
    const auto bigger = oracle::make_kg(10, 2, more);
    for (const auto& sr : rules.rules()) {
      CHECK(score_rule(bigger, sr.rule, 1 << 30, 0).support >= sr.stats.support);
    }
  }
}

TEST_CASE("rule file round trip") {
  const auto kg = oracle::make_kg(3, 3, {{0, 0, 1}, {1, 1, 2}, {0, 2, 2}});
  auto o = exhaustive(2);
  o.pessimism = 5;
  const auto rules = mine(kg, o);
  std::ostringstream a;
  write_rules(a, rules, kg.relation_vocab());
  std::istringstream in(a.str());
  const auto back = read_rules(in, kg.relation_vocab());
  std::ostringstream b;
  write_rules(b, back, kg.relation_vocab());
  CHECK(a.str() == b.str());
  CHECK(back.size() == rules.size());

  const ClosedPathRule r{2, {fwd(0), inv(1)}};
  const auto text = rule_to_string(r, kg.relation_vocab());
  CHECK(text == "r2(X0,X2) <= r0(X0,X1), r1(X2,X1)");
  CHECK(rule_from_string(text, kg.relation_vocab()) == r);
  CHECK_THROWS(rule_from_string("r9(X0,X1) <= r0(X0,X1)", kg.relation_vocab()));
}

}
