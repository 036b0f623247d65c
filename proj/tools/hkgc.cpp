// Command-line front end: ingest, mine, train, eval, stats, explain, ablate, synth.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hkgc/eval.hpp"
#include "hkgc/hybrid.hpp"
#include "hkgc/rankers.hpp"
#include "hkgc/rig.hpp"
#include "hkgc/rules.hpp"
#include "hkgc/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hkgc;

namespace {

int verbosity = 1;

template <typename... Args>
void log(int level, Args&&... args) {
  if (level > verbosity) return;
  std::ostringstream line;
  (line << ... << args);
  std::cerr << "[hkgc] " << line.str() << '\n';
}

struct DataOptions {
  std::string root = "data";
  std::string dataset;
  std::string version = "v1";
  std::string train_dir;
  std::string test_dir;
};

DatasetBundle load(const DataOptions& d) {
  if (!d.train_dir.empty() || !d.test_dir.empty()) {
    if (d.train_dir.empty() || d.test_dir.empty()) throw std::invalid_argument("--train-dir and --test-dir go together");
    return load_dataset_dirs(d.train_dir, d.test_dir, d.dataset.empty() ? fs::path(d.train_dir).filename().string() : d.dataset);
  }
  if (d.dataset.empty()) throw std::invalid_argument("no dataset given (--dataset or --train-dir/--test-dir)");
  return load_dataset(d.root, d.dataset, d.version);
}

struct Paths {
  std::string out = "out";
  std::string rules;
  std::string rgcn;
  std::string compgcn;
  std::string nbf;

  std::string or_default(const std::string& v, const char* file) const {
    return v.empty() ? (fs::path(out) / file).string() : v;
  }
  std::string rules_path() const { return or_default(rules, "rules.tsv"); }
};

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

RuleSet load_rules(const std::string& path, const Vocabulary& relations) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read rules from " + path + " (run `mine` first)");
  return read_rules(in, relations);
}

void save_rules(const std::string& path, const RuleSet& rules, const Vocabulary& relations) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_rules(out, rules, relations);
}

json summary_json(const MetricSummary& s) {
  auto pair = [](double m, double sd) { return json{{"mean", m}, {"spread", sd}}; };
  return json{{"mrr", pair(s.mean.mrr, s.spread.mrr)},
              {"hits1", pair(s.mean.hits1, s.spread.hits1)},
              {"hits3", pair(s.mean.hits3, s.spread.hits3)},
              {"hits10", pair(s.mean.hits10, s.spread.hits10)},
              {"queries", s.mean.count}};
}

json report_json(const MetricsReport& r) {
  json bands = json::object();
  for (const auto& [b, s] : r.bands) bands[band_name(b)] = summary_json(s);
  std::size_t in_a = 0;
  for (const auto& o : r.outcomes) in_a += o.gold_in_a;
  return json{{"dataset", r.dataset},
              {"strategy", r.strategy},
              {"setting", r.setting},
              {"filtered", r.filtered},
              {"runs", r.runs},
              {"queries", r.outcomes.size()},
              {"gold_in_a", r.outcomes.empty() ? 0.0 : static_cast<double>(in_a) / r.outcomes.size()},
              {"overall", summary_json(r.overall)},
              {"bands", bands}};
}

std::string report_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream csv;
  csv << "dataset,strategy,setting,band,metric,mean,spread\n";
  auto rows = [&](const MetricsReport& r, const std::string& band, const MetricSummary& s) {
    const std::pair<const char*, double Metrics::*> fields[] = {
        {"mrr", &Metrics::mrr}, {"hits1", &Metrics::hits1}, {"hits3", &Metrics::hits3}, {"hits10", &Metrics::hits10}};
    for (const auto& [name, m] : fields) {
      csv << r.dataset << ',' << r.strategy << ',' << r.setting << ',' << band << ',' << name << ',' << s.mean.*m
          << ',' << s.spread.*m << '\n';
    }
  };
  for (const auto& r : reports) {
    rows(r, "all", r.overall);
    for (const auto& [b, s] : r.bands) rows(r, band_name(b), s);
  }
  return csv.str();
}

json stats_json(const StatsReport& s) {
  return json{{"dataset", s.dataset},
              {"relations_train", s.relations_train},
              {"relations_test", s.relations_test},
              {"entities_train", s.entities_train},
              {"entities_test", s.entities_test},
              {"triples_train", s.triples_train},
              {"triples_test", s.triples_test},
              {"rules", s.rules},
              {"queries", s.queries},
              {"a_empty_pct", 100.0 * s.a_empty},
              {"a_single_pct", 100.0 * s.a_single},
              {"a_over10_pct", 100.0 * s.a_over10},
              {"rule_instantiations", s.rule_instantiations}};
}

json train_json(const std::string& arch, const TrainReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation", e.validation},
                      {"best_so_far", e.best_so_far}});
  }
  return json{{"arch", arch},
              {"best_epoch", r.best_epoch},
              {"best_validation", r.best_validation},
              {"validation_metric", arch == "nbf" ? "mrr" : "accuracy"},
              {"train_examples", r.train_examples},
              {"validation_examples", r.validation_examples},
              {"skipped_queries", r.skipped_queries},
              {"epochs", epochs}};
}

/// Applies `key = value` lines to options not given on the command line.
void apply_config(const std::string& path, CLI::App& app, CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt) {
      log(1, "config key '", key, "' does not apply to this command; ignored");
      continue;
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

MetricsReport run_eval(const DatasetBundle& bundle, const RuleSet& rules, const StrategySpec& spec, const Paths& paths,
                       const EvalConfig& config, std::size_t top_k) {
  std::optional<RigAggregator> rgcn, compgcn;
  std::optional<NbfRanker> nbf;
  Models models;
  auto adjust = [&](RigAggregator m) {
    if (top_k == 0) return m;
    AggregatorConfig c = m.config();
    c.top_k = top_k;
    return RigAggregator(c, m.num_relations(), m.params());
  };
  if (spec.primary == Primary::Rgcn) {
    rgcn.emplace(adjust(RigAggregator::load(paths.or_default(paths.rgcn, "rgcn.ckpt"))));
    models.rgcn = &*rgcn;
  }
  if (spec.primary == Primary::CompGcn) {
    compgcn.emplace(adjust(RigAggregator::load(paths.or_default(paths.compgcn, "compgcn.ckpt"))));
    models.compgcn = &*compgcn;
  }
  if (spec.needs_nbf()) {
    nbf.emplace(NbfRanker::load(paths.or_default(paths.nbf, "nbf.ckpt")));
    models.nbf = &*nbf;
  }
  for (const auto* m : {models.rgcn, models.compgcn}) {
    if (m && m->num_relations() != bundle.relations->size()) throw std::runtime_error("model/dataset relation mismatch");
  }
  if (models.nbf && models.nbf->num_relations() != bundle.relations->size()) {
    throw std::runtime_error("model/dataset relation mismatch");
  }
  return evaluate(bundle, rules, spec, models, config);
}

json dump_rankings(const DatasetBundle& bundle, const RuleSet& rules, const StrategySpec& spec, const Paths& paths,
                   const EvalConfig& config, std::size_t limit) {
  std::optional<RigAggregator> agg;
  std::optional<NbfRanker> nbf;
  Models models;
  if (spec.primary == Primary::Rgcn) models.rgcn = &agg.emplace(RigAggregator::load(paths.or_default(paths.rgcn, "rgcn.ckpt")));
  if (spec.primary == Primary::CompGcn) {
    models.compgcn = &agg.emplace(RigAggregator::load(paths.or_default(paths.compgcn, "compgcn.ckpt")));
  }
  if (spec.needs_nbf()) models.nbf = &nbf.emplace(NbfRanker::load(paths.or_default(paths.nbf, "nbf.ckpt")));
  const auto& facts = bundle.test_graph.train;
  const auto& ents = facts.entity_vocab();
  const auto& rels = *bundle.relations;
  json out = json::array();
  const auto triples = bundle.test_graph.test.triples();
  const std::size_t n = config.max_triples ? std::min(config.max_triples, triples.size()) : triples.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (auto dir : {QueryDirection::Tail, QueryDirection::Head}) {
      const auto& t = triples[i];
      const Query q{dir == QueryDirection::Tail ? t.head : t.tail, t.relation, dir};
      const auto part = apply_rules(facts, rules, q, config.apply);
      Rng rng(query_seed(config.seed, 0, q));
      const auto ranking = run_strategy(facts, q, part, spec, models, &rng);
      json entries = json::array();
      for (std::size_t k = 0; k < std::min(limit, ranking.entries.size()); ++k) {
        const auto& e = ranking.entries[k];
        entries.push_back({{"entity", ents.name(e.entity)}, {"score", e.score}, {"tie_group", e.tie_group},
                           {"provenance", e.provenance == Provenance::A ? "A" : "B"}});
      }
      const std::string anchor = ents.name(q.anchor);
      out.push_back({{"query", dir == QueryDirection::Tail ? json::array({anchor, rels.name(t.relation), "?"})
                                                            : json::array({"?", rels.name(t.relation), anchor})},
                     {"gold", ents.name(dir == QueryDirection::Tail ? t.tail : t.head)},
                     {"a_size", part.a_q.size()},
                     {"ranking", entries}});
    }
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid rule/GNN knowledge graph completion"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  DataOptions data;
  Paths paths;
  std::uint64_t seed = 0;
  bool quiet = false, verbose = false;
  app.add_option("--config", config_path, "flat key = value file; flags given here win");
  app.add_option("--data-root", data.root, "directory holding <dataset>_<version>[_ind]");
  app.add_option("--dataset", data.dataset, "dataset name, e.g. fb237 or WN18RR");
  app.add_option("--version", data.version, "dataset version tag");
  app.add_option("--train-dir", data.train_dir, "training graph directory (overrides --dataset)");
  app.add_option("--test-dir", data.test_dir, "test graph directory");
  app.add_option("--out", paths.out, "output directory");
  app.add_option("--rules", paths.rules, "rule file (default <out>/rules.tsv)");
  app.add_option("--seed", seed, "global seed");
  app.add_flag("--quiet", quiet, "only errors on stderr");
  app.add_flag("--verbose", verbose, "more logging");

  auto* ingest = app.add_subcommand("ingest", "load and validate a dataset, print its statistics");

  MineOptions mine_opts;
  double budget = 10.0;
  std::int64_t iterations = -1;
  auto* mine_cmd = app.add_subcommand("mine", "learn closed path rules from the training graph");
  mine_cmd->add_option("--budget-seconds", budget, "wall-clock sampling budget");
  mine_cmd->add_option("--iterations", iterations, "fixed number of sampled paths instead of a budget");
  mine_cmd->add_option("--max-len", mine_opts.max_len, "maximum body length");
  mine_cmd->add_option("--pc", mine_opts.pessimism, "pessimism constant added to body groundings");
  mine_cmd->add_option("--min-support", mine_opts.min_support);
  mine_cmd->add_option("--min-confidence", mine_opts.min_confidence);
  mine_cmd->add_flag("--exhaustive", mine_opts.exhaustive, "enumerate all paths instead of sampling");

  std::string arch = "rgcn";
  std::string checkpoint;
  int epochs = -1, hidden = -1, layers = -1, bases = -1, negatives = -1, batch = -1;
  double lr = -1;
  std::size_t train_topk = 0, max_train_queries = 0, max_valid_queries = 500;
  auto* train_cmd = app.add_subcommand("train", "train an aggregator or the fallback ranker");
  train_cmd->add_option("--arch", arch, "rgcn, compgcn or nbf")->check(CLI::IsMember({"rgcn", "compgcn", "nbf"}));
  train_cmd->add_option("--checkpoint", checkpoint, "output path (default <out>/<arch>.ckpt)");
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--lr", lr);
  train_cmd->add_option("--hidden", hidden);
  train_cmd->add_option("--layers", layers);
  train_cmd->add_option("--bases", bases);
  train_cmd->add_option("--negatives", negatives);
  train_cmd->add_option("--batch", batch);
  train_cmd->add_option("--topk", train_topk, "ground rules per rule instantiation graph");
  train_cmd->add_option("--max-train-queries", max_train_queries, "nbf: queries per epoch, 0 = all");
  train_cmd->add_option("--max-valid-queries", max_valid_queries, "nbf: validation queries, 0 = all");

  std::string strategy = "anyburl-max+shuffle";
  std::string setting = "full";
  std::size_t eval_topk = 0, max_triples = 0, dump_limit = 50;
  int runs = 5;
  bool raw = false;
  std::string metrics_json, metrics_csv, dump_path;
  auto* eval_cmd = app.add_subcommand("eval", "rank test queries with a hybrid strategy");
  eval_cmd->add_option("--strategy", strategy, "<primary>+<fallback>, or 'all'");
  eval_cmd->add_option("--setting", setting, "full or reduced50")->check(CLI::IsMember({"full", "reduced50"}));
  eval_cmd->add_option("--topk", eval_topk, "override the aggregator's ground rules per graph");
  eval_cmd->add_option("--runs", runs);
  eval_cmd->add_flag("--raw", raw, "unfiltered ranking");
  eval_cmd->add_option("--max-triples", max_triples, "evaluate only the first N test triples");
  eval_cmd->add_option("--rgcn", paths.rgcn);
  eval_cmd->add_option("--compgcn", paths.compgcn);
  eval_cmd->add_option("--nbf", paths.nbf);
  eval_cmd->add_option("--metrics-json", metrics_json, "default <out>/metrics.json");
  eval_cmd->add_option("--metrics-csv", metrics_csv, "default <out>/metrics.csv");
  eval_cmd->add_option("--dump-rankings", dump_path, "per-query ranking dump (JSON)");
  eval_cmd->add_option("--dump-limit", dump_limit, "entries per query in the dump");

  auto* stats_cmd = app.add_subcommand("stats", "dataset and rule statistics");

  std::string query_text, candidate, graph = "test", dot_path;
  std::size_t explain_topk = 5;
  auto* explain_cmd = app.add_subcommand("explain", "rule instantiation graph of one prediction as DOT");
  explain_cmd->add_option("--query", query_text, "h,r,? or ?,r,t")->required();
  explain_cmd->add_option("--candidate", candidate, "answer entity")->required();
  explain_cmd->add_option("--graph", graph, "test or train")->check(CLI::IsMember({"test", "train"}));
  explain_cmd->add_option("--topk", explain_topk);
  explain_cmd->add_option("--dot", dot_path, "write DOT here instead of stdout");

  std::string sweep, values, ablate_arch = "compgcn", ablate_fallback = "shuffle";
  int ablate_epochs = -1;
  double ablate_budget = 10.0;
  auto* ablate_cmd = app.add_subcommand("ablate", "mining budget or top-k sweep");
  ablate_cmd->add_option("--sweep", sweep, "budget or topk")->required()->check(CLI::IsMember({"budget", "topk"}));
  ablate_cmd->add_option("--values", values, "comma separated grid (default: 10,100,1000 or 5,10,50,100,1000)");
  ablate_cmd->add_option("--arch", ablate_arch)->check(CLI::IsMember({"rgcn", "compgcn"}));
  ablate_cmd->add_option("--fallback", ablate_fallback)->check(CLI::IsMember({"shuffle"}));
  ablate_cmd->add_option("--epochs", ablate_epochs);
  ablate_cmd->add_option("--budget-seconds", ablate_budget, "mining budget for the topk sweep");
  ablate_cmd->add_option("--max-triples", max_triples);
  ablate_cmd->add_option("--runs", runs);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a small planted-rule inductive dataset");
  synth_cmd->add_option("--name", synth.name);
  synth_cmd->add_option("--train-entities", synth.train_entities);
  synth_cmd->add_option("--test-entities", synth.test_entities);

  try {
    app.parse(argc, argv);
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(config_path, app, active);
    verbosity = quiet ? 0 : verbose ? 2 : 1;
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    if (active == synth_cmd) {
      synth.seed = seed;
      write_synthetic(paths.out, synth);
      log(1, "wrote ", (fs::path(paths.out) / synth.name).string(), " and its _ind twin");
      return 0;
    }

    const DatasetBundle bundle = load(data);
    const auto& rels = *bundle.relations;
    log(2, "loaded ", bundle.name, " with ", rels.size(), " relations");

    if (active == ingest) {
      const StatsReport s = dataset_stats(bundle, RuleSet(rels.size()));
      json j = stats_json(s);
      j.erase("rules");
      j.erase("queries");
      j.erase("a_empty_pct");
      j.erase("a_single_pct");
      j.erase("a_over10_pct");
      j.erase("rule_instantiations");
      j["splits"] = {{"train", {bundle.train_graph.train.size(), bundle.train_graph.valid.size(), bundle.train_graph.test.size()}},
                     {"test", {bundle.test_graph.train.size(), bundle.test_graph.valid.size(), bundle.test_graph.test.size()}}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (active == mine_cmd) {
      mine_opts.seed = seed;
      mine_opts.budget_seconds = budget;
      if (iterations >= 0) mine_opts.iterations = iterations;
      const RuleSet rules = mine(bundle.train_graph.train, mine_opts);
      save_rules(paths.rules_path(), rules, rels);
      log(1, "mined ", rules.size(), " rules in ", elapsed(), " s -> ", paths.rules_path());
      return 0;
    }

    if (active == train_cmd) {
      TrainReport report;
      const std::string out_path = checkpoint.empty() ? (fs::path(paths.out) / (arch + ".ckpt")).string() : checkpoint;
      ensure_parent(out_path);
      if (arch == "nbf") {
        NbfConfig c;
        c.seed = seed;
        if (epochs >= 0) c.max_epochs = epochs;
        if (lr > 0) c.learning_rate = lr;
        if (hidden > 0) c.dim = hidden;
        if (layers >= 0) c.layers = layers;
        if (negatives > 0) c.negatives = negatives;
        if (batch > 0) c.batch_size = batch;
        c.max_train_queries = max_train_queries;
        c.max_valid_queries = max_valid_queries;
        train_nbf(bundle, c, &report).save(out_path);
      } else {
        AggregatorConfig c = arch == "rgcn" ? AggregatorConfig::rgcn() : AggregatorConfig::compgcn();
        c.seed = seed;
        if (epochs >= 0) c.max_epochs = epochs;
        if (lr > 0) c.learning_rate = lr;
        if (hidden > 0) c.hidden = hidden;
        if (layers > 0) c.layers = layers;
        if (bases > 0) c.bases = bases;
        if (negatives >= 0) c.negatives = negatives;
        if (batch > 0) c.batch_size = batch;
        if (train_topk > 0) c.top_k = train_topk;
        const RuleSet rules = load_rules(paths.rules_path(), rels);
        train_aggregator(bundle, rules, c, &report).save(out_path);
      }
      const json j = train_json(arch, report);
      write_text(fs::path(paths.out) / ("train_" + arch + ".json"), j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
      log(1, "trained ", arch, " in ", elapsed(), " s, best validation ", report.best_validation, " -> ", out_path);
      return 0;
    }

    // ablate mines its own rules
    const RuleSet rules = active == ablate_cmd ? RuleSet(rels.size()) : load_rules(paths.rules_path(), rels);

    if (active == eval_cmd) {
      EvalConfig config;
      config.setting = parse_setting(setting);
      config.filtered = !raw;
      config.runs = runs;
      config.seed = seed;
      config.max_triples = max_triples;
      std::vector<StrategySpec> specs;
      if (strategy == "all") {
        specs = all_strategies();
      } else {
        specs.push_back(StrategySpec::parse(strategy));
      }
      std::vector<MetricsReport> reports;
      json all = json::array();
      for (const auto& spec : specs) {
        reports.push_back(run_eval(bundle, rules, spec, paths, config, eval_topk));
        all.push_back(report_json(reports.back()));
        log(1, spec.name(), ": MRR ", reports.back().overall.mean.mrr, " H@10 ", reports.back().overall.mean.hits10);
      }
      const json out = specs.size() == 1 ? all.front() : all;
      write_text(metrics_json.empty() ? fs::path(paths.out) / "metrics.json" : fs::path(metrics_json), out.dump(2) + "\n");
      write_text(metrics_csv.empty() ? fs::path(paths.out) / "metrics.csv" : fs::path(metrics_csv), report_csv(reports));
      if (!dump_path.empty()) {
        write_text(dump_path, dump_rankings(bundle, rules, specs.front(), paths, config, dump_limit).dump(1) + "\n");
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (active == stats_cmd) {
      std::cout << stats_json(dataset_stats(bundle, rules)).dump(2) << '\n';
      return 0;
    }

    if (active == explain_cmd) {
      const auto& facts = graph == "test" ? bundle.test_graph.train : bundle.train_graph.train;
      const auto& ents = facts.entity_vocab();
      std::vector<std::string> parts;
      std::stringstream in(query_text);
      for (std::string p; std::getline(in, p, ',');) parts.push_back(p);
      if (parts.size() != 3 || (parts[0] == "?") == (parts[2] == "?")) {
        throw std::invalid_argument("--query must be h,r,? or ?,r,t");
      }
      auto entity = [&](const std::string& name) {
        auto id = ents.find(name);
        if (!id) throw std::invalid_argument("unknown entity: " + name);
        return *id;
      };
      const auto rel = rels.find(parts[1]);
      if (!rel) throw std::invalid_argument("unknown relation: " + parts[1]);
      const bool tail_query = parts[2] == "?";
      const Query q{entity(tail_query ? parts[0] : parts[2]), *rel, tail_query ? QueryDirection::Tail : QueryDirection::Head};
      const auto part = apply_rules(facts, rules, q, covering_top_k(explain_topk));
      const Evidence* ev = part.find(entity(candidate));
      if (!ev) throw std::runtime_error("no rule predicts " + candidate + " for this query");
      const auto rig = build_rig(top_ground_rules(*ev, explain_topk), q.anchor, ev->candidate);
      std::string dot = rig_to_dot(rig, 5, ents, rels);
      std::ostringstream legend;
      for (const auto& [idx, conf] : rig.contributing_rules) {
        legend << "// " << conf << "  " << rule_to_string(rules.at(idx).rule, rels) << '\n';
      }
      dot = legend.str() + dot;
      if (dot_path.empty()) {
        std::cout << dot;
      } else {
        write_text(dot_path, dot);
      }
      return 0;
    }

    if (active == ablate_cmd) {
      const bool by_budget = sweep == "budget";
      const auto grid = parse_list(values.empty() ? (by_budget ? "10,100,1000" : "5,10,50,100,1000") : values);
      EvalConfig config;
      config.runs = runs;
      config.seed = seed;
      config.max_triples = max_triples;
      const StrategySpec spec = StrategySpec::parse(ablate_arch + "+" + ablate_fallback);
      AggregatorConfig base = ablate_arch == "rgcn" ? AggregatorConfig::rgcn() : AggregatorConfig::compgcn();
      base.seed = seed;
      if (ablate_epochs >= 0) base.max_epochs = ablate_epochs;
      std::optional<RuleSet> fixed;
      json rows = json::array();
      std::ostringstream csv;
      csv << sweep << ",rules,validation_accuracy,mrr,hits1,hits3,hits10\n";
      for (double v : grid) {
        MineOptions mo;
        mo.seed = seed;
        mo.budget_seconds = by_budget ? v : ablate_budget;
        AggregatorConfig c = base;
        if (!by_budget) c.top_k = static_cast<std::size_t>(v);
        if (by_budget || !fixed) {
          log(1, "mining for ", mo.budget_seconds, " s");
          fixed = mine(bundle.train_graph.train, mo);
        }
        TrainReport tr;
        const RigAggregator model = train_aggregator(bundle, *fixed, c, &tr);
        Models models;
        (spec.primary == Primary::Rgcn ? models.rgcn : models.compgcn) = &model;
        const auto r = evaluate(bundle, *fixed, spec, models, config);
        rows.push_back({{sweep, v},
                        {"rules", fixed->size()},
                        {"validation_accuracy", tr.best_validation},
                        {"mrr", r.overall.mean.mrr},
                        {"hits1", r.overall.mean.hits1},
                        {"hits3", r.overall.mean.hits3},
                        {"hits10", r.overall.mean.hits10}});
        csv << v << ',' << fixed->size() << ',' << tr.best_validation << ',' << r.overall.mean.mrr << ','
            << r.overall.mean.hits1 << ',' << r.overall.mean.hits3 << ',' << r.overall.mean.hits10 << '\n';
        log(1, sweep, "=", v, ": rules ", fixed->size(), ", acc ", tr.best_validation, ", MRR ", r.overall.mean.mrr);
      }
      const json out{{"dataset", bundle.name}, {"sweep", sweep}, {"strategy", spec.name()}, {"rows", rows}};
      write_text(fs::path(paths.out) / ("ablate_" + sweep + ".json"), out.dump(2) + "\n");
      write_text(fs::path(paths.out) / ("ablate_" + sweep + ".csv"), csv.str());
      std::cout << out.dump(2) << '\n';
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "[hkgc] error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
