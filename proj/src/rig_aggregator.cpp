#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hkgc/rankers.hpp"

namespace hkgc {

std::string arch_name(AggregatorArch a) { return a == AggregatorArch::Rgcn ? "rgcn" : "compgcn"; }

AggregatorArch parse_arch(std::string_view s) {
  if (s == "rgcn") return AggregatorArch::Rgcn;
  if (s == "compgcn") return AggregatorArch::CompGcn;
  throw std::invalid_argument("unknown aggregator architecture: " + std::string(s));
}

AggregatorConfig AggregatorConfig::rgcn() { return {}; }

AggregatorConfig AggregatorConfig::compgcn() {
  AggregatorConfig c;
  c.arch = AggregatorArch::CompGcn;
  c.learning_rate = 0.001;
  return c;
}

std::string AggregatorConfig::descriptor(std::int32_t num_relations) const {
  std::ostringstream d;
  d << "kind=aggregator;arch=" << arch_name(arch) << ";layers=" << layers << ";bases=" << bases
    << ";hidden=" << hidden << ";distance_cap=" << distance_cap
    << ";composition=" << (composition == Composition::Hadamard ? "hadamard" : "subtract")
    << ";top_k=" << top_k << ";num_relations=" << num_relations;
  return d.str();
}

std::map<std::string, std::string> parse_descriptor(const std::string& d) {
  std::map<std::string, std::string> out;
  std::istringstream in(d);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed checkpoint descriptor: " + d);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

RigExample make_example(const Evidence& evidence, const Query& q, std::int32_t num_relations,
                        const AggregatorConfig& config, double label) {
  RigExample ex;
  const auto top = top_ground_rules(evidence, config.top_k);
  ex.rig = build_rig(top, q.anchor, evidence.candidate);
  ex.features = featurize(ex.rig, config.distance_cap);
  ex.query_relation = materialized_relation(
      q.relation, q.direction == QueryDirection::Tail ? Direction::Forward : Direction::Inverse, num_relations);
  ex.label = label;
  return ex;
}

// ---------------------------------------------------------------------------

namespace {

std::string layer_key(const char* arch, int l, const std::string& what) {
  return std::string(arch) + ".l" + std::to_string(l) + "." + what;
}

struct Batch {
  Tensor features;
  std::vector<std::int32_t> src, dst, rel;
  std::vector<bool> forward;
  std::vector<double> inv_count;  ///< 1 / in-degree of dst under rel
  std::vector<std::int32_t> tails, query_relations;
  std::int32_t nodes = 0;
};

Batch assemble(std::span<const RigExample> batch, std::int32_t num_relations, int input_dim) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Batch b;
  for (const auto& ex : batch) {
    if (ex.rig.nodes.empty()) throw std::invalid_argument("empty rule instantiation graph");
    if (ex.features.cols() != input_dim || ex.features.rows() != static_cast<Eigen::Index>(ex.rig.nodes.size())) {
      throw std::invalid_argument("node feature dimension mismatch");
    }
    if (ex.query_relation < 0 || ex.query_relation >= 2 * num_relations) {
      throw std::out_of_range("query relation out of range");
    }
    b.nodes += static_cast<std::int32_t>(ex.rig.nodes.size());
  }
  b.features.resize(b.nodes, input_dim);
  std::int32_t off = 0;
  for (const auto& ex : batch) {
    b.features.middleRows(off, ex.features.rows()) = ex.features;
    for (const auto& e : ex.rig.edges) {
      if (e.relation < 0 || e.relation >= num_relations) throw std::out_of_range("edge relation out of range");
      b.src.push_back(off + e.src);
      b.dst.push_back(off + e.dst);
      b.rel.push_back(materialized_relation(e.relation, e.direction, num_relations));
      b.forward.push_back(e.direction == Direction::Forward);
    }
    b.tails.push_back(off + ex.rig.tail_node);
    b.query_relations.push_back(ex.query_relation);
    off += static_cast<std::int32_t>(ex.rig.nodes.size());
  }
  std::map<std::pair<std::int32_t, std::int32_t>, int> count;
  for (std::size_t i = 0; i < b.dst.size(); ++i) ++count[{b.dst[i], b.rel[i]}];
  for (std::size_t i = 0; i < b.dst.size(); ++i) b.inv_count.push_back(1.0 / count[{b.dst[i], b.rel[i]}]);
  return b;
}

Tensor row_mask(const std::vector<bool>& keep, bool value, Eigen::Index cols) {
  Tensor m = Tensor::Zero(static_cast<Eigen::Index>(keep.size()), cols);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] == value) m.row(static_cast<Eigen::Index>(i)).setOnes();
  }
  return m;
}

}  // namespace

RigAggregator::RigAggregator(AggregatorConfig config, std::int32_t num_relations)
    : config_(config), num_relations_(num_relations) {
  if (config_.layers < 1) throw std::invalid_argument("aggregator needs at least one layer");
  if (config_.arch == AggregatorArch::Rgcn && (config_.bases < 1 || config_.bases > 2 * num_relations)) {
    throw std::invalid_argument("number of bases must lie in [1, 2|R|]");
  }
  if (num_relations < 1) throw std::invalid_argument("aggregator needs relations");
  init();
}

RigAggregator::RigAggregator(AggregatorConfig config, std::int32_t num_relations, ParamStore params)
    : RigAggregator(config, num_relations) {
  for (const auto& [name, t] : params_.tensors()) {
    if (!params.contains(name)) throw std::runtime_error("checkpoint lacks parameter " + name);
    const auto& p = params.get(name);
    if (p.rows() != t.rows() || p.cols() != t.cols()) throw std::runtime_error("shape mismatch for " + name);
  }
  if (params.tensors().size() != params_.tensors().size()) throw std::runtime_error("checkpoint has extra parameters");
  params_ = std::move(params);
}

void RigAggregator::init() {
  Rng rng(derive_seed(config_.seed, {0xa66}));
  const auto rels = 2 * num_relations_;
  int in = config_.input_dim();
  const int h = config_.hidden;
  if (config_.arch == AggregatorArch::Rgcn) {
    for (int l = 0; l < config_.layers; ++l) {
      for (int j = 0; j < config_.bases; ++j) {
        params_.add(layer_key("rgcn", l, "basis" + std::to_string(j)), xavier_uniform(in, h, rng));
      }
      params_.add(layer_key("rgcn", l, "coef"), xavier_uniform(rels, config_.bases, rng));
      params_.add(layer_key("rgcn", l, "self"), xavier_uniform(in, h, rng));
      in = h;
    }
  } else {
    params_.add("compgcn.rel0", xavier_uniform(rels, in, rng));
    for (int l = 0; l < config_.layers; ++l) {
      params_.add(layer_key("compgcn", l, "w_fwd"), xavier_uniform(in, h, rng));
      params_.add(layer_key("compgcn", l, "w_inv"), xavier_uniform(in, h, rng));
      params_.add(layer_key("compgcn", l, "w_self"), xavier_uniform(in, h, rng));
      params_.add(layer_key("compgcn", l, "w_rel"), xavier_uniform(in, h, rng));
      in = h;
    }
  }
  params_.add("head.rel", xavier_uniform(rels, h, rng));
  params_.add("head.A", xavier_uniform(2 * h, 1, rng));
  params_.add("head.b", Tensor::Zero(1, 1));
}

Var RigAggregator::forward(Tape& tape, std::span<const RigExample> batch) const {
  const Batch b = assemble(batch, num_relations_, config_.input_dim());
  const auto edges = static_cast<Eigen::Index>(b.src.size());
  const int h = config_.hidden;
  Var x = tape.constant(b.features);
  auto param = [&](const std::string& name) { return tape.parameter(params_, name); };

  if (config_.arch == AggregatorArch::Rgcn) {
    Tensor norm(edges, h);
    for (Eigen::Index i = 0; i < edges; ++i) norm.row(i).setConstant(b.inv_count[static_cast<std::size_t>(i)]);
    const Var norm_v = tape.constant(std::move(norm));
    for (int l = 0; l < config_.layers; ++l) {
      Var out = matmul(x, param(layer_key("rgcn", l, "self")));
      if (edges > 0) {
        const Var xs = gather_rows(x, b.src);
        const Var coef = gather_rows(param(layer_key("rgcn", l, "coef")), b.rel);
        Var sum;
        for (int j = 0; j < config_.bases; ++j) {
          Tensor pick = Tensor::Zero(config_.bases, h);
          pick.row(j).setOnes();
          const Var a = matmul(coef, tape.constant(std::move(pick)));
          const Var term = hadamard(matmul(xs, param(layer_key("rgcn", l, "basis" + std::to_string(j)))), a);
          sum = j == 0 ? term : add(sum, term);
        }
        out = add(out, segment_sum(hadamard(sum, norm_v), b.dst, b.nodes));
      }
      x = relu(out);
    }
  } else {
    Var z = param("compgcn.rel0");
    for (int l = 0; l < config_.layers; ++l) {
      Var out = matmul(x, param(layer_key("compgcn", l, "w_self")));
      if (edges > 0) {
        const Var xs = gather_rows(x, b.src);
        const Var zr = gather_rows(z, b.rel);
        const Var msg = config_.composition == Composition::Hadamard ? hadamard(xs, zr) : add(xs, scale(zr, -1.0));
        const auto in = msg.cols();
        const Var fwd = hadamard(msg, tape.constant(row_mask(b.forward, true, in)));
        const Var inv = hadamard(msg, tape.constant(row_mask(b.forward, false, in)));
        const Var m = add(matmul(fwd, param(layer_key("compgcn", l, "w_fwd"))),
                          matmul(inv, param(layer_key("compgcn", l, "w_inv"))));
        out = add(out, segment_sum(m, b.dst, b.nodes));
      }
      x = relu(out);
      z = matmul(z, param(layer_key("compgcn", l, "w_rel")));
    }
  }

  const auto n = static_cast<Eigen::Index>(batch.size());
  const Var tail = gather_rows(x, b.tails);
  const Var rq = gather_rows(param("head.rel"), b.query_relations);
  const Var joined = concat_cols(tail, rq);
  return add(matmul(joined, param("head.A")), matmul(tape.constant(Tensor::Ones(n, 1)), param("head.b")));
}

std::vector<double> RigAggregator::score(std::span<const RigExample> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  constexpr std::size_t chunk = 256;
  for (std::size_t i = 0; i < batch.size(); i += chunk) {
    Tape tape;
    const auto part = batch.subspan(i, std::min(chunk, batch.size() - i));
    const Var logits = forward(tape, part);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) out.push_back(sigmoid(logits.value()(r, 0)));
  }
  return out;
}

std::vector<RankedEntry> RigAggregator::rank(const CandidatePartition& partition, const Query& q) const {
  std::vector<RigExample> examples;
  examples.reserve(partition.a_q.size());
  for (const auto& ev : partition.a_q) examples.push_back(make_example(ev, q, num_relations_, config_));
  std::vector<RankedEntry> entries;
  if (examples.empty()) return entries;
  const auto scores = score(examples);
  for (std::size_t i = 0; i < scores.size(); ++i) entries.push_back({partition.a_q[i].candidate, scores[i], 0});
  return order_by_score(std::move(entries));
}

void RigAggregator::save(const std::filesystem::path& path) const {
  save_checkpoint(path, params_, config_.descriptor(num_relations_));
}

RigAggregator RigAggregator::load(const std::filesystem::path& path) {
  auto ck = load_checkpoint(path);
  const auto d = parse_descriptor(ck.descriptor);
  auto field = [&](const char* k) {
    auto it = d.find(k);
    if (it == d.end()) throw std::runtime_error(std::string("checkpoint descriptor lacks ") + k);
    return it->second;
  };
  if (field("kind") != "aggregator") throw std::runtime_error("checkpoint is not an aggregator");
  AggregatorConfig c = parse_arch(field("arch")) == AggregatorArch::Rgcn ? AggregatorConfig::rgcn()
                                                                          : AggregatorConfig::compgcn();
  c.layers = std::stoi(field("layers"));
  c.bases = std::stoi(field("bases"));
  c.hidden = std::stoi(field("hidden"));
  c.distance_cap = std::stoi(field("distance_cap"));
  c.composition = field("composition") == "subtract" ? Composition::Subtract : Composition::Hadamard;
  c.top_k = std::stoul(field("top_k"));
  return RigAggregator(c, std::stoi(field("num_relations")), std::move(ck.params));
}

// ---------------------------------------------------------------------------

std::vector<RigExample> build_examples(const KnowledgeGraph& facts, const KnowledgeGraph& split,
                                       const RuleSet& rules, const AggregatorConfig& config,
                                       std::uint64_t seed, std::size_t* skipped) {
  std::vector<RigExample> out;
  std::size_t skip = 0;
  const auto triples = split.triples();
  const auto R = facts.num_relations();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    for (auto dir : {QueryDirection::Tail, QueryDirection::Head}) {
      const Query q{dir == QueryDirection::Tail ? t.head : t.tail, t.relation, dir};
      const EntityId gold = dir == QueryDirection::Tail ? t.tail : t.head;
      const auto part = apply_rules(facts, rules, q, covering_top_k(config.top_k));
      const Evidence* ev = part.find(gold);
      if (!ev) {
        ++skip;
        continue;
      }
      out.push_back(make_example(*ev, q, R, config, 1.0));
      Rng rng(derive_seed(seed, {i, static_cast<std::uint64_t>(dir)}));
      std::vector<EntityId> taken;
      std::uniform_int_distribution<std::size_t> pick(0, part.a_q.size() - 1);
      for (int attempt = 0; attempt < config.max_negative_attempts && static_cast<int>(taken.size()) < config.negatives;
           ++attempt) {
        const Evidence& c = part.a_q[pick(rng)];
        if (c.candidate == gold || std::find(taken.begin(), taken.end(), c.candidate) != taken.end()) continue;
        const Triple corrupt = complete(q, c.candidate);
        if (facts.contains(corrupt) || split.contains(corrupt)) continue;
        taken.push_back(c.candidate);
        out.push_back(make_example(c, q, R, config, 0.0));
      }
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

double binary_accuracy(const RigAggregator& model, std::span<const RigExample> examples) {
  if (examples.empty()) return 0.0;
  const auto s = model.score(examples);
  std::size_t right = 0;
  for (std::size_t i = 0; i < s.size(); ++i) right += (s[i] >= 0.5) == (examples[i].label == 1.0);
  return static_cast<double>(right) / static_cast<double>(s.size());
}

RigAggregator train_aggregator(const DatasetBundle& bundle, const RuleSet& rules, const AggregatorConfig& config,
                               TrainReport* report) {
  const auto& facts = bundle.train_graph.train;
  TrainReport rep;
  auto train = build_examples(facts, facts, rules, config, derive_seed(config.seed, {1}), &rep.skipped_queries);
  const auto valid = build_examples(facts, bundle.train_graph.valid, rules, config, derive_seed(config.seed, {2}));
  if (train.empty()) throw std::runtime_error("no trainable examples: every gold rule instantiation graph is empty");
  rep.train_examples = train.size();
  rep.validation_examples = valid.size();
  // Without validation queries the training set stands in for model selection.
  const std::span<const RigExample> selector = valid.empty() ? std::span<const RigExample>(train) : valid;

  RigAggregator model(config, facts.num_relations());
  Adam adam(AdamOptions{config.learning_rate});
  ParamStore best = model.params();
  rep.best_validation = binary_accuracy(model, selector);
  rep.epochs.push_back({0, 0.0, rep.best_validation, rep.best_validation});
  Rng rng(derive_seed(config.seed, {3}));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  int stale = 0;
  for (int epoch = 1; epoch <= config.max_epochs && stale < config.patience; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(config.batch_size)) {
      std::vector<RigExample> batch;
      std::vector<double> labels;
      for (std::size_t k = i; k < std::min(order.size(), i + static_cast<std::size_t>(config.batch_size)); ++k) {
        batch.push_back(train[order[k]]);
        labels.push_back(train[order[k]].label);
      }
      Tape tape;
      const Var loss = bce_with_logits(model.forward(tape, batch), labels);
      loss_sum += loss.value()(0, 0);
      ++batches;
      adam.step(model.params(), tape.backward(loss, model.params()));
    }
    const double acc = binary_accuracy(model, selector);
    if (acc > rep.best_validation) {
      rep.best_validation = acc;
      rep.best_epoch = epoch;
      best = model.params();
      stale = 0;
    } else {
      ++stale;
    }
    rep.epochs.push_back({epoch, loss_sum / static_cast<double>(batches), acc, rep.best_validation});
  }
  model.params() = best;
  if (report) *report = std::move(rep);
  return model;
}

}  // namespace hkgc
