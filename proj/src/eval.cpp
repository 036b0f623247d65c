#include "hkgc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hkgc {

std::string setting_name(Setting s) { return s == Setting::Full ? "full" : "reduced50"; }

Setting parse_setting(std::string_view s) {
  if (s == "full") return Setting::Full;
  if (s == "reduced50" || s == "reduced-50") return Setting::Reduced50;
  throw std::invalid_argument("unknown evaluation setting: " + std::string(s));
}

std::string band_name(Band b) {
  switch (b) {
    case Band::Frequent:
      return "frequent";
    case Band::Common:
      return "common";
    case Band::Rare:
      return "rare";
  }
  return "?";
}

std::int64_t midpoint_rank(std::int64_t better, std::int64_t tied) { return 1 + better + (tied + 1) / 2; }

std::int64_t gold_rank(const HybridRanking& ranking, EntityId gold, const std::vector<char>& universe) {
  if (gold < 0 || static_cast<std::size_t>(gold) >= universe.size() || !universe[static_cast<std::size_t>(gold)]) {
    throw std::invalid_argument("gold answer is not in the candidate universe");
  }
  auto it = std::find_if(ranking.entries.begin(), ranking.entries.end(),
                         [&](const HybridEntry& e) { return e.entity == gold; });
  if (it == ranking.entries.end()) throw std::invalid_argument("gold answer missing from the ranking");
  const auto group = it->tie_group;
  std::int64_t better = 0, tied = 0;
  for (const auto& e : ranking.entries) {
    if (e.entity == gold || !universe[static_cast<std::size_t>(e.entity)]) continue;
    if (e.tie_group < group) {
      ++better;
    } else if (e.tie_group == group) {
      ++tied;
    }
  }
  return midpoint_rank(better, tied);
}

Metrics metrics_from_ranks(std::span<const std::int64_t> ranks) {
  Metrics m;
  m.count = ranks.size();
  if (ranks.empty()) return m;
  for (auto r : ranks) {
    m.mrr += 1.0 / static_cast<double>(r);
    m.hits1 += r <= 1;
    m.hits3 += r <= 3;
    m.hits10 += r <= 10;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

MetricSummary summarize(std::span<const Metrics> runs) {
  MetricSummary s;
  if (runs.empty()) return s;
  const auto n = static_cast<double>(runs.size());
  auto field = [&](auto member) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r.*member;
    mean /= n;
    double var = 0.0;
    for (const auto& r : runs) var += (r.*member - mean) * (r.*member - mean);
    s.mean.*member = mean;
    s.spread.*member = runs.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  };
  field(&Metrics::mrr);
  field(&Metrics::hits1);
  field(&Metrics::hits3);
  field(&Metrics::hits10);
  s.mean.count = s.spread.count = runs.front().count;
  return s;
}

std::vector<Band> frequency_bands(const KnowledgeGraph& train_split) {
  const auto n = train_split.num_relations();
  std::vector<std::size_t> count(static_cast<std::size_t>(n), 0);
  for (const auto& t : train_split.triples()) ++count[static_cast<std::size_t>(t.relation)];
  std::vector<RelationId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](RelationId a, RelationId b) {
    return count[static_cast<std::size_t>(a)] > count[static_cast<std::size_t>(b)];
  });
  const auto frequent = static_cast<std::size_t>((n + 9) / 10);
  const auto rare = static_cast<std::size_t>(n / 2);
  std::vector<Band> bands(static_cast<std::size_t>(n), Band::Common);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < frequent) {
      bands[static_cast<std::size_t>(order[i])] = Band::Frequent;
    } else if (i >= order.size() - rare) {
      bands[static_cast<std::size_t>(order[i])] = Band::Rare;
    }
  }
  return bands;
}

namespace {

struct LabeledQuery {
  Query query;
  EntityId gold;
};

std::vector<LabeledQuery> test_queries(const KnowledgeGraph& split, std::size_t max_triples) {
  std::vector<LabeledQuery> out;
  const auto triples = split.triples();
  const std::size_t n = max_triples > 0 ? std::min(max_triples, triples.size()) : triples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = triples[i];
    out.push_back({{t.head, t.relation, QueryDirection::Tail}, t.tail});
    out.push_back({{t.tail, t.relation, QueryDirection::Head}, t.head});
  }
  return out;
}

}  // namespace

MetricsReport evaluate(const DatasetBundle& bundle, const RuleSet& rules, const StrategySpec& strategy,
                       const Models& models, const EvalConfig& config) {
  if (config.runs < 1) throw std::invalid_argument("at least one evaluation run is required");
  if (strategy.needs_nbf() && !models.nbf) throw std::invalid_argument("strategy needs an nbf model");
  if (strategy.primary == Primary::Rgcn && !models.rgcn) throw std::invalid_argument("strategy needs an rgcn model");
  if (strategy.primary == Primary::CompGcn && !models.compgcn) {
    throw std::invalid_argument("strategy needs a compgcn model");
  }
  const auto& facts = bundle.test_graph.train;
  const auto n_entities = facts.num_entities();
  const auto bands = frequency_bands(bundle.train_graph.train);
  auto apply = config.apply;
  if (strategy.primary == Primary::Rgcn) apply = covering_top_k(models.rgcn->config().top_k, apply);
  if (strategy.primary == Primary::CompGcn) apply = covering_top_k(models.compgcn->config().top_k, apply);

  MetricsReport report;
  report.dataset = bundle.name;
  report.strategy = strategy.name();
  report.setting = setting_name(config.setting);
  report.filtered = config.filtered && config.setting == Setting::Full;
  report.runs = config.runs;

  const auto queries = test_queries(bundle.test_graph.test, config.max_triples);
  std::vector<char> universe(static_cast<std::size_t>(n_entities));
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& [q, gold] = queries[qi];
    const auto partition = apply_rules(facts, rules, q, apply);
    std::vector<double> nbf;
    if (strategy.needs_nbf()) nbf = models.nbf->score_all(facts, q);
    const auto* nbf_ptr = strategy.needs_nbf() ? &nbf : nullptr;
    const auto a = primary_order(partition, q, strategy.primary, models, nbf_ptr);
    std::vector<RankedEntry> b_fixed;
    if (strategy.fallback == Fallback::Nbf) b_fixed = fallback_order(partition, Fallback::Nbf, nbf_ptr, nullptr);

    QueryOutcome out;
    out.query = q;
    out.gold = gold;
    out.a_size = partition.a_q.size();
    out.gold_in_a = partition.find(gold) != nullptr;
    out.band = bands.at(static_cast<std::size_t>(q.relation));
    std::vector<EntityId> filtered;
    if (report.filtered) filtered = filter_set(bundle, q, gold);

    for (int run = 0; run < config.runs; ++run) {
      const auto r = static_cast<std::uint64_t>(run);
      HybridRanking ranking;
      if (strategy.fallback == Fallback::Nbf) {
        ranking = compose(a, b_fixed);
      } else {
        Rng rng(query_seed(config.seed, r, q));
        ranking = compose(a, fallback_order(partition, Fallback::Shuffle, nullptr, &rng));
      }
      if (config.setting == Setting::Full) {
        std::fill(universe.begin(), universe.end(), 1);
        for (auto e : filtered) universe[static_cast<std::size_t>(e)] = 0;
      } else {
        std::fill(universe.begin(), universe.end(), 0);
        universe[static_cast<std::size_t>(gold)] = 1;
        std::vector<EntityId> pool;
        pool.reserve(static_cast<std::size_t>(n_entities));
        for (EntityId e = 0; e < n_entities; ++e) {
          if (e != gold) pool.push_back(e);
        }
        Rng rng(derive_seed(config.seed, {r, qi, 0x50}));
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.negatives), pool.size());
        for (std::size_t i = 0; i < k; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
          std::swap(pool[i], pool[pick(rng)]);
          universe[static_cast<std::size_t>(pool[i])] = 1;
        }
      }
      out.ranks.push_back(gold_rank(ranking, gold, universe));
    }
    report.outcomes.push_back(std::move(out));
  }

  auto collect = [&](std::optional<Band> band) {
    std::vector<Metrics> per_run;
    for (int run = 0; run < config.runs; ++run) {
      std::vector<std::int64_t> ranks;
      for (const auto& o : report.outcomes) {
        if (!band || o.band == *band) ranks.push_back(o.ranks[static_cast<std::size_t>(run)]);
      }
      per_run.push_back(metrics_from_ranks(ranks));
    }
    return summarize(per_run);
  };
  report.overall = collect(std::nullopt);
  for (auto b : {Band::Frequent, Band::Common, Band::Rare}) report.bands[b] = collect(b);
  return report;
}

StatsReport dataset_stats(const DatasetBundle& bundle, const RuleSet& rules, const ApplyOptions& apply) {
  StatsReport s;
  s.dataset = bundle.name;
  auto count = [](const GraphSplits& g, std::int32_t& rels, std::size_t& triples) {
    std::set<RelationId> seen;
    for (const auto* kg : {&g.train, &g.valid, &g.test}) {
      for (const auto& t : kg->triples()) seen.insert(t.relation);
      triples += kg->size();
    }
    rels = static_cast<std::int32_t>(seen.size());
  };
  count(bundle.train_graph, s.relations_train, s.triples_train);
  count(bundle.test_graph, s.relations_test, s.triples_test);
  s.entities_train = bundle.train_graph.train.num_entities();
  s.entities_test = bundle.test_graph.train.num_entities();
  s.rules = rules.size();

  const auto& facts = bundle.test_graph.train;
  const auto queries = test_queries(bundle.test_graph.test, 0);
  std::size_t empty = 0, single = 0, over = 0, with_gold = 0;
  double inst = 0.0;
  for (const auto& [q, gold] : queries) {
    const auto p = apply_rules(facts, rules, q, apply);
    empty += p.a_q.empty();
    single += p.a_q.size() == 1;
    over += p.a_q.size() > 10;
    if (const auto* ev = p.find(gold)) {
      ++with_gold;
      inst += static_cast<double>(ev->total_matches);
    }
  }
  s.queries = queries.size();
  if (!queries.empty()) {
    const auto n = static_cast<double>(queries.size());
    s.a_empty = static_cast<double>(empty) / n;
    s.a_single = static_cast<double>(single) / n;
    s.a_over10 = static_cast<double>(over) / n;
  }
  s.rule_instantiations = with_gold ? inst / static_cast<double>(with_gold) : 0.0;
  return s;
}

}  // namespace hkgc
