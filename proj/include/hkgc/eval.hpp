#pragma once

#include <map>
#include <string>
#include <vector>

#include "hkgc/hybrid.hpp"

namespace hkgc {

enum class Setting : std::uint8_t { Full, Reduced50 };
enum class Band : std::uint8_t { Frequent, Common, Rare };

std::string setting_name(Setting s);
Setting parse_setting(std::string_view s);
std::string band_name(Band b);

struct EvalConfig {
  Setting setting = Setting::Full;
  /// Removes other known answers from the full-setting universe.
  bool filtered = true;
  int runs = 5;
  std::uint64_t seed = 0;
  int negatives = 50;
  /// Evaluate only the first N test triples (both directions each); 0 means all.
  std::size_t max_triples = 0;
  ApplyOptions apply;
};

/// 1 + |better| + ceil(|tied others| / 2).
std::int64_t midpoint_rank(std::int64_t better, std::int64_t tied);

/// Rank of `gold` among the entries flagged in `universe` (indexed by entity id).
std::int64_t gold_rank(const HybridRanking& ranking, EntityId gold, const std::vector<char>& universe);

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;
};

Metrics metrics_from_ranks(std::span<const std::int64_t> ranks);

struct MetricSummary {
  Metrics mean;
  Metrics spread;  ///< sample standard deviation over runs
};

MetricSummary summarize(std::span<const Metrics> runs);

struct QueryOutcome {
  Query query;
  EntityId gold = 0;
  std::size_t a_size = 0;
  bool gold_in_a = false;
  Band band = Band::Rare;
  std::vector<std::int64_t> ranks;  ///< one per run
};

struct MetricsReport {
  std::string dataset;
  std::string strategy;
  std::string setting;
  bool filtered = true;
  int runs = 0;
  MetricSummary overall;
  std::map<Band, MetricSummary> bands;
  std::vector<QueryOutcome> outcomes;
};

/// Relations ranked by training-split frequency (ties by id): top ceil(10%) frequent, bottom floor(50%) rare.
std::vector<Band> frequency_bands(const KnowledgeGraph& train_split);

MetricsReport evaluate(const DatasetBundle& bundle, const RuleSet& rules, const StrategySpec& strategy,
                       const Models& models, const EvalConfig& config);

struct StatsReport {
  std::string dataset;
  std::int32_t relations_train = 0;
  std::int32_t relations_test = 0;
  std::int32_t entities_train = 0;
  std::int32_t entities_test = 0;
  std::size_t triples_train = 0;
  std::size_t triples_test = 0;
  std::size_t rules = 0;
  std::size_t queries = 0;
  double a_empty = 0.0;  ///< fraction with |A_q| = 0
  double a_single = 0.0;
  double a_over10 = 0.0;
  /// Mean ground matches of the gold answer, over queries whose gold answer is in A_q.
  double rule_instantiations = 0.0;
};

StatsReport dataset_stats(const DatasetBundle& bundle, const RuleSet& rules, const ApplyOptions& apply = {});

}  // namespace hkgc
