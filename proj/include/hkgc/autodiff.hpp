#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hkgc/random.hpp"
#include "hkgc/tensor.hpp"

namespace hkgc {

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Named trainable tensors, iterated in name order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::size_t parameter_count() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Tensor> tensors_;
};

using Gradients = std::map<std::string, Tensor>;

/// Adds `g` into `into` entry by entry (creating missing entries).
void accumulate(Gradients& into, const Gradients& g);

/// Records a computation for one reverse sweep. Node creation order is a topological order.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// References the tensor inside `store`; the store must outlive the tape and stay unchanged.
  Var parameter(const ParamStore& store, const std::string& name);

  /// Reverse sweep from a 1x1 loss. Every parameter of `store` gets an entry; untouched ones are zero.
  Gradients backward(Var loss, const ParamStore& store);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  // Used by op implementations.
  Var record(Tensor value, std::vector<int> inputs, Backward backward, const char* op);
  void accumulate_grad(int id, const Tensor& g);

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    std::vector<int> inputs;
    Backward backward;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::string param;
  };

  std::vector<Node> nodes_;
  std::map<std::string, int> param_ids_;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var sigmoid(Var a);
Var relu(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
/// Row i of the result is row index[i] of `a`, or zeros when index[i] == -1.
Var gather_rows(Var a, std::vector<std::int32_t> index);
/// Sums rows of `a` into `num_segments` rows by segment id.
Var segment_sum(Var a, std::vector<std::int32_t> segment, std::int32_t num_segments);
/// Column-wise max per segment; empty segments yield zero rows.
Var segment_max(Var a, std::vector<std::int32_t> segment, std::int32_t num_segments);
/// Mean over all entries, as a 1x1 tensor.
Var mean(Var a);
/// Mean binary cross-entropy of sigmoid(logits) against 0/1 labels, in the stable softplus form.
Var bce_with_logits(Var logits, std::span<const double> labels);

double sigmoid(double x);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam with one shared step counter.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void step(ParamStore& params, const Gradients& grads);
  std::int64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::map<std::string, std::pair<Tensor, Tensor>> moments_;
  std::int64_t step_ = 0;
};

Tensor xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Tensor normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

/// Versioned binary checkpoint: descriptor string plus named little-endian float64 tensors.
void save_checkpoint(std::ostream& out, const ParamStore& params, const std::string& descriptor);
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const std::string& descriptor);

struct Checkpoint {
  ParamStore params;
  std::string descriptor;
};

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hkgc
