#include "doctest.h"
#include "../oracles.hpp"
#include "hkgc/eval.hpp"
#include "hkgc/synthetic.hpp"

using namespace hkgc;

namespace {

HybridRanking ranking(std::vector<EntityId> order) {
  HybridRanking r;
  for (std::size_t i = 0; i < order.size(); ++i) r.entries.push_back({order[i], 0.0, static_cast<std::int32_t>(i)});
  return r;
}

/// Test graph b0 -s-> b1 -t-> b2 with the held-out triple r(b0,b2), plus unrelated b3..b5.
DatasetBundle composition_bundle(const std::filesystem::path& dir) {
  SplitTriples train, test;
  train[0] = {{"a0", "s", "a1"}, {"a1", "t", "a2"}, {"a0", "r", "a2"}};
  test[0] = {{"b0", "s", "b1"}, {"b1", "t", "b2"}, {"b3", "s", "b4"}, {"b5", "t", "b4"}};
  test[2] = {{"b0", "r", "b2"}};
  write_splits(dir / "comp", train);
  write_splits(dir / "comp_ind", test);
  return load_dataset_dirs(dir / "comp", dir / "comp_ind", "comp");
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("metrics from ranks") {
  const std::vector<std::int64_t> ranks{1, 2, 4};
  const auto m = metrics_from_ranks(ranks);
  CHECK(m.mrr == doctest::Approx((1 + 0.5 + 0.25) / 3));
  CHECK(m.hits1 == doctest::Approx(1.0 / 3));
  CHECK(m.hits3 == doctest::Approx(2.0 / 3));
  CHECK(m.hits10 == 1.0);
  CHECK(m.count == 3);
  CHECK(metrics_from_ranks({}).count == 0);
}

TEST_CASE("midpoint ranks") {
  CHECK(midpoint_rank(0, 3) == 3);
  CHECK(midpoint_rank(0, 0) == 1);
  CHECK(midpoint_rank(2, 1) == 4);
  HybridRanking r;
  r.entries = {{5, 0, 0}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}, {4, 0, 1}, {0, 0, 2}};
  const std::vector<char> all(6, 1);
  CHECK(gold_rank(r, 2, all) == 1 + 1 + 2);
  std::vector<char> some = all;
  some[5] = 0;
  some[3] = 0;
  CHECK(gold_rank(r, 2, some) == 1 + 0 + 1);
  CHECK_THROWS(gold_rank(r, 5, some));
}

TEST_CASE("oracle and reversed orderings") {
  const int n = 30;
  const std::vector<char> all(n, 1);
  std::vector<std::int64_t> best, worst;
  for (EntityId gold = 0; gold < n; ++gold) {
    std::vector<EntityId> order{gold};
    for (EntityId e = 0; e < n; ++e) {
      if (e != gold) order.push_back(e);
    }
    best.push_back(gold_rank(ranking(order), gold, all));
    std::reverse(order.begin(), order.end());
    worst.push_back(gold_rank(ranking(order), gold, all));
  }
  CHECK(metrics_from_ranks(best).mrr == 1.0);
  CHECK(metrics_from_ranks(worst).hits10 == 0.0);
}

TEST_CASE("summaries use the sample deviation") {
  const std::vector<Metrics> runs{{0.2, 0, 0, 0, 4}, {0.4, 0, 0, 0, 4}};
  const auto s = summarize(runs);
  CHECK(s.mean.mrr == doctest::Approx(0.3));
  CHECK(s.spread.mrr == doctest::Approx(std::sqrt(0.02)));
  CHECK(summarize(std::vector<Metrics>{{0.2, 0, 0, 0, 4}}).spread.mrr == 0.0);
}

TEST_CASE("frequency bands") {
  std::vector<Triple> t;
  for (RelationId r = 0; r < 10; ++r) {
    for (int k = 0; k <= r; ++k) t.push_back({k, r, 20 + k});
  }
  auto b = frequency_bands(oracle::make_kg(40, 10, t));
  CHECK(b[9] == Band::Frequent);
  for (RelationId r = 5; r < 9; ++r) CHECK(b[static_cast<std::size_t>(r)] == Band::Common);
  for (RelationId r = 0; r < 5; ++r) CHECK(b[static_cast<std::size_t>(r)] == Band::Rare);

  b = frequency_bands(oracle::make_kg(2, 10, {}));
  CHECK(b[0] == Band::Frequent);
  CHECK(std::count(b.begin(), b.end(), Band::Common) == 4);
  CHECK(b[9] == Band::Rare);
  CHECK(frequency_bands(oracle::make_kg(2, 1, {}))[0] == Band::Frequent);
}

TEST_CASE("evaluation on a hand-built bundle") {
  const auto dir = oracle::temp_dir("eval_hand");
  const auto b = composition_bundle(dir);
  const RelationId s = *b.relations->find("s"), t = *b.relations->find("t"), r = *b.relations->find("r");
  RuleSet rules(b.relations->size());
  rules.insert({r, {{s, Direction::Forward}, {t, Direction::Forward}}}, {1, 1, 0.5, false});

  EvalConfig c;
  c.runs = 3;
  const auto rep = evaluate(b, rules, {Primary::AnyburlMax, Fallback::Shuffle}, {}, c);
  REQUIRE(rep.outcomes.size() == 2);
  for (const auto& o : rep.outcomes) {
    CHECK(o.gold_in_a);
    CHECK(o.a_size == 1);
    CHECK(o.ranks == std::vector<std::int64_t>{1, 1, 1});
  }
  CHECK(rep.overall.mean.mrr == 1.0);
  CHECK(rep.overall.spread.mrr == 0.0);
  CHECK(rep.filtered);

  const auto none = evaluate(b, RuleSet(b.relations->size()), {Primary::AnyburlMax, Fallback::Shuffle}, {}, c);
  for (const auto& o : none.outcomes) CHECK_FALSE(o.gold_in_a);
  const auto again = evaluate(b, RuleSet(b.relations->size()), {Primary::AnyburlMax, Fallback::Shuffle}, {}, c);
  for (std::size_t i = 0; i < none.outcomes.size(); ++i) CHECK(none.outcomes[i].ranks == again.outcomes[i].ranks);

  c.setting = Setting::Reduced50;
  const auto reduced = evaluate(b, rules, {Primary::NoisyOr, Fallback::Shuffle}, {}, c);
  CHECK(reduced.setting == "reduced50");
  CHECK_FALSE(reduced.filtered);
  CHECK(reduced.overall.mean.mrr == 1.0);

  CHECK_THROWS(evaluate(b, rules, {Primary::Rgcn, Fallback::Shuffle}, {}, c));
  c.runs = 0;
  CHECK_THROWS(evaluate(b, rules, {Primary::AnyburlMax, Fallback::Shuffle}, {}, c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("filtering and reduced universes on synthetic data") {
  const auto dir = oracle::temp_dir("eval_synth");
  const auto b = make_synthetic_bundle(dir, SynthOptions{});
  MineOptions mo;
  mo.iterations = 2000;
  const auto rules = mine(b.train_graph.train, mo);
  EvalConfig c;
  c.runs = 2;
  const StrategySpec spec{Primary::AnyburlMax, Fallback::Shuffle};
  const auto filtered = evaluate(b, rules, spec, {}, c);
  c.filtered = false;
  const auto raw = evaluate(b, rules, spec, {}, c);
  c.setting = Setting::Reduced50;
  const auto reduced = evaluate(b, rules, spec, {}, c);
  REQUIRE(filtered.outcomes.size() == raw.outcomes.size());
  for (std::size_t i = 0; i < raw.outcomes.size(); ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(filtered.outcomes[i].ranks[k] <= raw.outcomes[i].ranks[k]);
      CHECK(reduced.outcomes[i].ranks[k] <= 51);
    }
  }
  for (auto band : {Band::Frequent, Band::Common, Band::Rare}) CHECK(filtered.bands.count(band) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset statistics") {
  const auto dir = oracle::temp_dir("stats");
  const auto b = composition_bundle(dir);
  const RelationId s = *b.relations->find("s"), t = *b.relations->find("t"), r = *b.relations->find("r");
  auto st = dataset_stats(b, RuleSet(b.relations->size()));
  CHECK(st.a_empty == 1.0);
  CHECK(st.queries == 2);
  CHECK(st.triples_train == 3);
  CHECK(st.triples_test == 5);
  CHECK(st.relations_train == 3);
  CHECK(st.entities_test == 6);
  RuleSet rules(b.relations->size());
  rules.insert({r, {{s, Direction::Forward}, {t, Direction::Forward}}}, {1, 1, 0.5, false});
  st = dataset_stats(b, rules);
  CHECK(st.a_empty == 0.0);
  CHECK(st.a_single == 1.0);
  CHECK(st.rule_instantiations == 1.0);
  CHECK(st.rules == 1);
  std::filesystem::remove_all(dir);
}

}
