#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hkgc/graph.hpp"

namespace hkgc {

/// Small inductive benchmark with planted structure:
///   r(x,z) <= s(x,y), t(y,z) holds for most compositions, u is symmetric, d is random noise.
struct SynthOptions {
  std::string name = "synth";
  int train_entities = 80;
  int test_entities = 60;
  /// Probability that a composition s.t is materialized as r.
  double planted = 0.85;
  /// Random r edges added, as a fraction of the entity count.
  double noise = 0.1;
  /// Include the symmetric relation u.
  bool symmetric = true;
  std::uint64_t seed = 1;
};

struct NamedTriple {
  std::string head, relation, tail;
};

/// train/valid/test triples of one graph.
using SplitTriples = std::array<std::vector<NamedTriple>, 3>;

struct SyntheticData {
  SplitTriples train_graph;
  SplitTriples test_graph;
};

SyntheticData generate_synthetic(const SynthOptions& options);

/// Writes train.txt, valid.txt and test.txt into `dir`.
void write_splits(const std::filesystem::path& dir, const SplitTriples& splits);

/// Writes `<dir>/<name>/{train,valid,test}.txt` and the same under `<dir>/<name>_ind`.
void write_synthetic(const std::filesystem::path& dir, const SynthOptions& options);

/// Generates, writes and loads.
DatasetBundle make_synthetic_bundle(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace hkgc
