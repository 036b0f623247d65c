#include "hkgc/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "hkgc/random.hpp"

namespace hkgc {

namespace {

SplitTriples generate_graph(int n, const std::string& prefix, const SynthOptions& o, Rng& rng) {
  if (n < 4) throw std::invalid_argument("synthetic graphs need at least 4 entities");
  std::uniform_int_distribution<int> any(0, n - 1);
  std::bernoulli_distribution keep(o.planted);
  auto other = [&](int x) {
    int y = any(rng);
    while (y == x) y = any(rng);
    return y;
  };
  std::set<std::tuple<int, std::string, int>> facts, targets;
  std::vector<int> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    s[static_cast<std::size_t>(x)] = other(x);
    t[static_cast<std::size_t>(x)] = other(x);
    facts.insert({x, "s", s[static_cast<std::size_t>(x)]});
    facts.insert({x, "t", t[static_cast<std::size_t>(x)]});
    facts.insert({x, "d", other(x)});
  }
  for (int x = 0; x < n; ++x) {
    const int z = t[static_cast<std::size_t>(s[static_cast<std::size_t>(x)])];
    if (z != x && keep(rng)) targets.insert({x, "r", z});
  }
  const int noise = static_cast<int>(o.noise * n);
  for (int i = 0; i < noise; ++i) {
    const int x = any(rng);
    targets.insert({x, "r", other(x)});
  }
  for (int i = 0; o.symmetric && i < n / 2; ++i) {
    const int a = any(rng), b = other(a);
    targets.insert({a, "u", b});
    targets.insert({b, "u", a});
  }
  std::vector<std::tuple<int, std::string, int>> shuffled(targets.begin(), targets.end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  auto named = [&](const std::tuple<int, std::string, int>& x) {
    return NamedTriple{prefix + std::to_string(std::get<0>(x)), std::get<1>(x), prefix + std::to_string(std::get<2>(x))};
  };
  SplitTriples out;
  for (const auto& f : facts) out[0].push_back(named(f));
  const std::size_t held = shuffled.size() * 15 / 100;
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    const int split = i < held ? 1 : i < 2 * held ? 2 : 0;
    out[static_cast<std::size_t>(split)].push_back(named(shuffled[i]));
  }
  return out;
}

}  // namespace

void write_splits(const std::filesystem::path& dir, const SplitTriples& g) {
  std::filesystem::create_directories(dir);
  static constexpr const char* kNames[] = {"train.txt", "valid.txt", "test.txt"};
  for (std::size_t i = 0; i < 3; ++i) {
    std::ofstream out(dir / kNames[i]);
    if (!out) throw std::runtime_error("cannot write " + (dir / kNames[i]).string());
    for (const auto& t : g[i]) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
}

SyntheticData generate_synthetic(const SynthOptions& options) {
  Rng rng(derive_seed(options.seed, {0x5e7}));
  SyntheticData d;
  d.train_graph = generate_graph(options.train_entities, "a", options, rng);
  d.test_graph = generate_graph(options.test_entities, "b", options, rng);
  return d;
}

void write_synthetic(const std::filesystem::path& dir, const SynthOptions& options) {
  const auto d = generate_synthetic(options);
  write_splits(dir / options.name, d.train_graph);
  write_splits(dir / (options.name + "_ind"), d.test_graph);
}

DatasetBundle make_synthetic_bundle(const std::filesystem::path& dir, const SynthOptions& options) {
  write_synthetic(dir, options);
  return load_dataset_dirs(dir / options.name, dir / (options.name + "_ind"), options.name);
}

}  // namespace hkgc
