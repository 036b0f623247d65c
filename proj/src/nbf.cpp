#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hkgc/rankers.hpp"

namespace hkgc {

std::string NbfConfig::descriptor(std::int32_t num_relations) const {
  std::ostringstream d;
  d << "kind=nbf;layers=" << layers << ";dim=" << dim << ";num_relations=" << num_relations;
  return d.str();
}

NbfRanker::NbfRanker(NbfConfig config, std::int32_t num_relations) : config_(config), num_relations_(num_relations) {
  if (config_.layers < 0) throw std::invalid_argument("negative layer count");
  if (config_.dim < 1) throw std::invalid_argument("embedding dimension must be positive");
  if (num_relations < 1) throw std::invalid_argument("ranker needs relations");
  init();
}

NbfRanker::NbfRanker(NbfConfig config, std::int32_t num_relations, ParamStore params)
    : NbfRanker(config, num_relations) {
  for (const auto& [name, t] : params_.tensors()) {
    if (!params.contains(name)) throw std::runtime_error("checkpoint lacks parameter " + name);
    const auto& p = params.get(name);
    if (p.rows() != t.rows() || p.cols() != t.cols()) throw std::runtime_error("shape mismatch for " + name);
  }
  if (params.tensors().size() != params_.tensors().size()) throw std::runtime_error("checkpoint has extra parameters");
  params_ = std::move(params);
}

void NbfRanker::init() {
  Rng rng(derive_seed(config_.seed, {0x4bf}));
  const auto rels = 2 * num_relations_;
  const int d = config_.dim;
  params_.add("nbf.query", xavier_uniform(rels, d, rng));
  for (int t = 0; t < config_.layers; ++t) {
    params_.add("nbf.l" + std::to_string(t) + ".rel", xavier_uniform(rels, d, rng));
    params_.add("nbf.l" + std::to_string(t) + ".W", xavier_uniform(2 * d, d, rng));
  }
  params_.add("nbf.mlp.W1", xavier_uniform(2 * d, d, rng));
  params_.add("nbf.mlp.b1", Tensor::Zero(1, d));
  params_.add("nbf.mlp.W2", xavier_uniform(d, 1, rng));
  params_.add("nbf.mlp.b2", Tensor::Zero(1, 1));
}

NbfRanker::Pass NbfRanker::forward(Tape& tape, const KnowledgeGraph& facts, const Query& q,
                                   std::optional<Triple> masked) const {
  facts.check_entity(q.anchor);
  facts.check_relation(q.relation);
  if (facts.num_relations() != num_relations_) throw std::invalid_argument("relation vocabulary mismatch");
  const std::int32_t qrel = materialized_relation(
      q.relation, q.direction == QueryDirection::Tail ? Direction::Forward : Direction::Inverse, num_relations_);

  // States stay exactly zero beyond `layers` hops since no layer has a bias.
  BoundedBfs bfs(facts.num_entities());
  bfs.run(facts, q.anchor, config_.layers);
  Pass pass;
  pass.ball.assign(bfs.reached().begin(), bfs.reached().end());
  pass.slot.assign(static_cast<std::size_t>(facts.num_entities()), -1);
  const auto n = static_cast<std::int32_t>(pass.ball.size());
  for (std::int32_t i = 0; i < n; ++i) pass.slot[static_cast<std::size_t>(pass.ball[static_cast<std::size_t>(i)])] = i;

  std::vector<std::int32_t> src, dst, rel;
  for (std::int32_t i = 0; i < n; ++i) {
    const EntityId u = pass.ball[static_cast<std::size_t>(i)];
    const auto out = facts.edges(u, Direction::Forward);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const EntityId v = out.neighbors[k];
      const RelationId r = out.relations[k];
      const auto j = pass.slot[static_cast<std::size_t>(v)];
      if (j < 0) continue;
      if (masked && *masked == Triple{u, r, v}) continue;
      src.push_back(i), dst.push_back(j), rel.push_back(r);
      src.push_back(j), dst.push_back(i), rel.push_back(r + num_relations_);
    }
  }

  auto param = [&](const std::string& name) { return tape.parameter(params_, name); };
  std::vector<std::int32_t> boundary(static_cast<std::size_t>(n), -1);
  boundary[static_cast<std::size_t>(pass.slot[static_cast<std::size_t>(q.anchor)])] = qrel;
  const Var h0 = gather_rows(param("nbf.query"), boundary);
  Var h = h0;
  for (int t = 0; t < config_.layers; ++t) {
    const std::string prefix = "nbf.l" + std::to_string(t);
    Var m = tape.constant(Tensor::Zero(n, config_.dim));
    if (!src.empty()) m = segment_sum(hadamard(gather_rows(h, src), gather_rows(param(prefix + ".rel"), rel)), dst, n);
    h = relu(matmul(concat_cols(m, h0), param(prefix + ".W")));
  }
  std::vector<std::int32_t> rows(static_cast<std::size_t>(n) + 1);
  std::iota(rows.begin(), rows.end() - 1, 0);
  rows.back() = -1;
  const Var states = gather_rows(h, rows);
  const Var query = gather_rows(param("nbf.query"), std::vector<std::int32_t>(rows.size(), qrel));
  const Var ones = tape.constant(Tensor::Ones(static_cast<Eigen::Index>(rows.size()), 1));
  const Var hidden = relu(add(matmul(concat_cols(states, query), param("nbf.mlp.W1")), matmul(ones, param("nbf.mlp.b1"))));
  pass.logits = add(matmul(hidden, param("nbf.mlp.W2")), matmul(ones, param("nbf.mlp.b2")));
  return pass;
}

std::vector<double> NbfRanker::score_all(const KnowledgeGraph& facts, const Query& q,
                                         std::optional<Triple> masked) const {
  Tape tape;
  const auto pass = forward(tape, facts, q, masked);
  const Tensor& l = pass.logits.value();
  std::vector<double> out(static_cast<std::size_t>(facts.num_entities()), l(l.rows() - 1, 0));
  for (std::size_t i = 0; i < pass.ball.size(); ++i) {
    out[static_cast<std::size_t>(pass.ball[i])] = l(static_cast<Eigen::Index>(i), 0);
  }
  return out;
}

void NbfRanker::save(const std::filesystem::path& path) const {
  save_checkpoint(path, params_, config_.descriptor(num_relations_));
}

NbfRanker NbfRanker::load(const std::filesystem::path& path) {
  auto ck = load_checkpoint(path);
  const auto d = parse_descriptor(ck.descriptor);
  auto field = [&](const char* k) {
    auto it = d.find(k);
    if (it == d.end()) throw std::runtime_error(std::string("checkpoint descriptor lacks ") + k);
    return it->second;
  };
  if (field("kind") != "nbf") throw std::runtime_error("checkpoint is not an nbf ranker");
  NbfConfig c;
  c.layers = std::stoi(field("layers"));
  c.dim = std::stoi(field("dim"));
  return NbfRanker(c, std::stoi(field("num_relations")), std::move(ck.params));
}

// ---------------------------------------------------------------------------

namespace {

struct LabeledQuery {
  Query query;
  EntityId gold;
  Triple triple;
};

std::vector<LabeledQuery> queries_of(const KnowledgeGraph& split) {
  std::vector<LabeledQuery> out;
  for (const auto& t : split.triples()) {
    out.push_back({{t.head, t.relation, QueryDirection::Tail}, t.tail, t});
    out.push_back({{t.tail, t.relation, QueryDirection::Head}, t.head, t});
  }
  return out;
}

}  // namespace

double nbf_mrr(const NbfRanker& model, const KnowledgeGraph& facts, const KnowledgeGraph& split,
               std::size_t max_queries, std::uint64_t seed) {
  auto qs = queries_of(split);
  if (qs.empty()) return 0.0;
  if (max_queries > 0 && qs.size() > max_queries) {
    Rng rng(seed);
    std::shuffle(qs.begin(), qs.end(), rng);
    qs.resize(max_queries);
  }
  double total = 0.0;
  for (const auto& lq : qs) {
    const auto s = model.score_all(facts, lq.query);
    const double g = s[static_cast<std::size_t>(lq.gold)];
    std::int64_t better = 0, tied = 0;
    for (std::size_t e = 0; e < s.size(); ++e) {
      if (static_cast<EntityId>(e) == lq.gold) continue;
      better += s[e] > g;
      tied += s[e] == g;
    }
    total += 1.0 / static_cast<double>(1 + better + (tied + 1) / 2);
  }
  return total / static_cast<double>(qs.size());
}

NbfRanker train_nbf(const DatasetBundle& bundle, const NbfConfig& config, TrainReport* report) {
  const auto& facts = bundle.train_graph.train;
  if (facts.empty()) throw std::runtime_error("training split is empty");
  NbfRanker model(config, facts.num_relations());
  Adam adam(AdamOptions{config.learning_rate});
  TrainReport rep;
  auto train = queries_of(facts);
  rep.train_examples = train.size();
  rep.validation_examples = bundle.train_graph.valid.size() * 2;
  const auto& selector = bundle.train_graph.valid.empty() ? facts : bundle.train_graph.valid;
  const auto vseed = derive_seed(config.seed, {2});
  rep.best_validation = nbf_mrr(model, facts, selector, config.max_valid_queries, vseed);
  rep.epochs.push_back({0, 0.0, rep.best_validation, rep.best_validation});
  ParamStore best = model.params();
  Rng rng(derive_seed(config.seed, {3}));
  std::uniform_int_distribution<EntityId> any(0, facts.num_entities() - 1);
  int stale = 0;
  for (int epoch = 1; epoch <= config.max_epochs && stale < config.patience; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    const std::size_t count =
        config.max_train_queries > 0 ? std::min(config.max_train_queries, train.size()) : train.size();
    double loss_sum = 0.0;
    Gradients acc;
    int in_batch = 0;
    auto flush = [&] {
      if (in_batch == 0) return;
      for (auto& [_, g] : acc) g /= static_cast<double>(in_batch);
      adam.step(model.params(), acc);
      acc.clear();
      in_batch = 0;
    };
    for (std::size_t i = 0; i < count; ++i) {
      const auto& lq = train[i];
      Tape tape;
      const auto pass = model.forward(tape, facts, lq.query, lq.triple);
      const auto outside = static_cast<std::int32_t>(pass.ball.size());
      auto row = [&](EntityId e) {
        const auto s = pass.slot[static_cast<std::size_t>(e)];
        return s < 0 ? outside : s;
      };
      std::vector<std::int32_t> rows{row(lq.gold)};
      std::vector<double> labels{1.0};
      for (int k = 0; k < config.negatives; ++k) {
        EntityId e = any(rng);
        if (e == lq.gold) continue;
        rows.push_back(row(e));
        labels.push_back(0.0);
      }
      const Var loss = bce_with_logits(gather_rows(pass.logits, rows), labels);
      loss_sum += loss.value()(0, 0);
      accumulate(acc, tape.backward(loss, model.params()));
      if (++in_batch == config.batch_size) flush();
    }
    flush();
    const double mrr = nbf_mrr(model, facts, selector, config.max_valid_queries, vseed);
    if (mrr > rep.best_validation) {
      rep.best_validation = mrr;
      rep.best_epoch = epoch;
      best = model.params();
      stale = 0;
    } else {
      ++stale;
    }
    rep.epochs.push_back({epoch, count ? loss_sum / static_cast<double>(count) : 0.0, mrr, rep.best_validation});
  }
  model.params() = best;
  if (report) *report = std::move(rep);
  return model;
}

}  // namespace hkgc
