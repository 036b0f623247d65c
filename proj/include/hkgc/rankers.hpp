#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hkgc/autodiff.hpp"
#include "hkgc/graph.hpp"
#include "hkgc/rig.hpp"
#include "hkgc/rule_engine.hpp"
#include "hkgc/rules.hpp"

namespace hkgc {

enum class AggregatorArch : std::uint8_t { Rgcn, CompGcn };
enum class Composition : std::uint8_t { Hadamard, Subtract };

std::string arch_name(AggregatorArch a);
AggregatorArch parse_arch(std::string_view s);

struct AggregatorConfig {
  AggregatorArch arch = AggregatorArch::Rgcn;
  int layers = 4;
  int bases = 4;
  int hidden = 32;
  int distance_cap = 5;
  double learning_rate = 0.004;
  int patience = 3;
  int negatives = 2;
  int max_negative_attempts = 50;
  std::size_t top_k = 5;
  int batch_size = 32;
  int max_epochs = 50;
  Composition composition = Composition::Hadamard;
  std::uint64_t seed = 0;

  static AggregatorConfig rgcn();
  static AggregatorConfig compgcn();
  int input_dim() const { return 2 * (distance_cap + 2); }
  /// Flat key=value summary stored in checkpoints.
  std::string descriptor(std::int32_t num_relations) const;
};

/// One RIG with its node features and the (materialized) query relation.
struct RigExample {
  RuleInstantiationGraph rig;
  Tensor features;
  std::int32_t query_relation = 0;
  double label = 0.0;
};

RigExample make_example(const Evidence& evidence, const Query& q, std::int32_t num_relations,
                        const AggregatorConfig& config, double label = 0.0);

/// R-GCN or CompGCN over rule instantiation graphs followed by sigmoid(A(h_tail ++ r_q) + b).
class RigAggregator {
 public:
  RigAggregator(AggregatorConfig config, std::int32_t num_relations);
  RigAggregator(AggregatorConfig config, std::int32_t num_relations, ParamStore params);

  /// Logits (batch x 1) recorded on `tape`.
  Var forward(Tape& tape, std::span<const RigExample> batch) const;
  std::vector<double> score(std::span<const RigExample> batch) const;

  /// Scores every candidate of A_q; result is ordered by score with ties by entity id.
  std::vector<RankedEntry> rank(const CandidatePartition& partition, const Query& q) const;

  const AggregatorConfig& config() const { return config_; }
  std::int32_t num_relations() const { return num_relations_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static RigAggregator load(const std::filesystem::path& path);

 private:
  void init();

  AggregatorConfig config_;
  std::int32_t num_relations_;
  ParamStore params_;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double validation = 0.0;
  double best_so_far = 0.0;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;  ///< 0 means the initialization was never beaten
  double best_validation = 0.0;
  std::size_t train_examples = 0;
  std::size_t validation_examples = 0;
  std::size_t skipped_queries = 0;
};

/// Gold RIG (label 1) plus sampled negatives with non-empty RIGs (label 0) for each query
/// built from `split`, with `facts` as the graph rules are applied to.
std::vector<RigExample> build_examples(const KnowledgeGraph& facts, const KnowledgeGraph& split,
                                       const RuleSet& rules, const AggregatorConfig& config,
                                       std::uint64_t seed, std::size_t* skipped = nullptr);

double binary_accuracy(const RigAggregator& model, std::span<const RigExample> examples);

RigAggregator train_aggregator(const DatasetBundle& bundle, const RuleSet& rules, const AggregatorConfig& config,
                               TrainReport* report = nullptr);

// ---------------------------------------------------------------------------

struct NbfConfig {
  int layers = 4;
  int dim = 32;
  int negatives = 32;
  double learning_rate = 1e-3;
  int max_epochs = 20;
  int patience = 3;
  int batch_size = 16;
  /// Caps on queries per epoch and validation queries; 0 uses all of them.
  std::size_t max_train_queries = 0;
  std::size_t max_valid_queries = 500;
  std::uint64_t seed = 0;

  std::string descriptor(std::int32_t num_relations) const;
};

/// Simplified path-based ranker: indicator boundary at the anchor, elementwise-product messages,
/// sum aggregation, bias-free layers, one-hidden-layer score head.
class NbfRanker {
 public:
  NbfRanker(NbfConfig config, std::int32_t num_relations);
  NbfRanker(NbfConfig config, std::int32_t num_relations, ParamStore params);

  /// A masked triple and its inverse are removed from the message graph.
  struct Pass {
    Var logits;                      ///< one row per entity in `ball`, plus one last row for the outside
    std::vector<EntityId> ball;      ///< entities within `layers` hops of the anchor
    std::vector<std::int32_t> slot;  ///< entity -> row, or -1 (outside)
  };
  Pass forward(Tape& tape, const KnowledgeGraph& facts, const Query& q,
               std::optional<Triple> masked = std::nullopt) const;

  /// Logit for every entity of `facts`.
  std::vector<double> score_all(const KnowledgeGraph& facts, const Query& q,
                                std::optional<Triple> masked = std::nullopt) const;

  const NbfConfig& config() const { return config_; }
  std::int32_t num_relations() const { return num_relations_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void save(const std::filesystem::path& path) const;
  static NbfRanker load(const std::filesystem::path& path);

 private:
  void init();

  NbfConfig config_;
  std::int32_t num_relations_;
  ParamStore params_;
};

/// Raw MRR over both query directions of `split`, scoring all entities of `facts`.
double nbf_mrr(const NbfRanker& model, const KnowledgeGraph& facts, const KnowledgeGraph& split,
               std::size_t max_queries, std::uint64_t seed);

NbfRanker train_nbf(const DatasetBundle& bundle, const NbfConfig& config, TrainReport* report = nullptr);

/// Flat `key=value;...` descriptor parsing used for checkpoint validation.
std::map<std::string, std::string> parse_descriptor(const std::string& d);

}  // namespace hkgc
