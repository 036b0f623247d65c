#include "hkgc/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hkgc {

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("uninitialized Var");
  return tape_->value(id_);
}

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  auto [it, fresh] = tensors_.insert_or_assign(name, std::move(value));
  (void)fresh;
  return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.tensors_.size() != b.tensors_.size()) return false;
  for (auto ia = a.tensors_.begin(), ib = b.tensors_.begin(); ia != a.tensors_.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (ia->second.rows() != ib->second.rows() || ia->second.cols() != ib->second.cols()) return false;
    if (ia->second != ib->second) return false;
  }
  return true;
}

void accumulate(Gradients& into, const Gradients& g) {
  for (const auto& [name, t] : g) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, t);
    } else {
      it->second += t;
    }
  }
}

// ---------------------------------------------------------------------------

const Tensor& Tape::value(int id) const {
  const auto& n = nodes_.at(static_cast<std::size_t>(id));
  return n.ref ? *n.ref : n.value;
}

Var Tape::constant(Tensor value) { return record(std::move(value), {}, nullptr, "constant"); }

Var Tape::parameter(const ParamStore& store, const std::string& name) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var(this, it->second);
  const Tensor& t = store.get(name);
  if (!t.allFinite()) throw std::domain_error("non-finite parameter " + name);
  Node n;
  n.ref = &t;
  n.requires_grad = true;
  n.param = name;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_ids_.emplace(name, id);
  return Var(this, id);
}

Var Tape::record(Tensor value, std::vector<int> inputs, Backward backward, const char* op) {
  if (!value.allFinite()) throw std::domain_error(std::string("non-finite value produced by ") + op);
  Node n;
  n.value = std::move(value);
  for (int i : inputs) n.requires_grad = n.requires_grad || nodes_.at(static_cast<std::size_t>(i)).requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate_grad(int id, const Tensor& g) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Gradients Tape::backward(Var loss, const ParamStore& store) {
  if (loss.tape() != this) throw std::invalid_argument("loss belongs to another tape");
  const auto& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) throw std::invalid_argument("backward needs a scalar (1x1) loss");
  for (auto& n : nodes_) n.has_grad = false;
  accumulate_grad(loss.id(), Tensor::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad || !n.backward) continue;
    const Tensor g = n.grad;
    n.backward(*this, g);
  }
  Gradients out;
  for (const auto& [name, t] : store.tensors()) {
    auto it = param_ids_.find(name);
    const Node* n = it == param_ids_.end() ? nullptr : &nodes_[static_cast<std::size_t>(it->second)];
    out.emplace(name, n && n->has_grad ? n->grad : Tensor::Zero(t.rows(), t.cols()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ops

namespace {

Tape& same_tape(Var a, Var b) {
  if (!a.tape() || a.tape() != b.tape()) throw std::invalid_argument("operands live on different tapes");
  return *a.tape();
}

void require_shape(bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string("shape mismatch in ") + op);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_shape(a.cols() == b.rows(), "matmul");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {ia, ib},
                  [ia, ib](Tape& tp, const Tensor& g) {
                    if (tp.requires_grad(ia)) tp.accumulate_grad(ia, g * tp.value(ib).transpose());
                    if (tp.requires_grad(ib)) tp.accumulate_grad(ib, tp.value(ia).transpose() * g);
                  },
                  "matmul");
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {ia, ib},
                  [ia, ib](Tape& tp, const Tensor& g) {
                    tp.accumulate_grad(ia, g);
                    tp.accumulate_grad(ib, g);
                  },
                  "add");
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {ia, ib},
                  [ia, ib](Tape& tp, const Tensor& g) {
                    if (tp.requires_grad(ia)) tp.accumulate_grad(ia, g.cwiseProduct(tp.value(ib)));
                    if (tp.requires_grad(ib)) tp.accumulate_grad(ib, g.cwiseProduct(tp.value(ia)));
                  },
                  "hadamard");
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return a.tape()->record(a.value() * s, {ia},
                          [ia, s](Tape& tp, const Tensor& g) { tp.accumulate_grad(ia, g * s); }, "scale");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Var a) {
  const int ia = a.id();
  Tensor out = a.value().unaryExpr([](double x) { return sigmoid(x); });
  const int io = static_cast<int>(a.tape()->size());
  return a.tape()->record(std::move(out), {ia},
                          [ia, io](Tape& tp, const Tensor& g) {
                            const Tensor& s = tp.value(io);
                            tp.accumulate_grad(ia, g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
                          },
                          "sigmoid");
}

Var relu(Var a) {
  const int ia = a.id();
  return a.tape()->record(a.value().cwiseMax(0.0), {ia},
                          [ia](Tape& tp, const Tensor& g) {
                            const Tensor& x = tp.value(ia);
                            tp.accumulate_grad(ia, (x.array() > 0.0).select(g, 0.0));
                          },
                          "relu");
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols of nothing");
  Tape& t = *parts.front().tape();
  const auto rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    require_shape(p.rows() == rows, "concat_cols");
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.record(std::move(out), ids,
                  [ids, widths](Tape& tp, const Tensor& g) {
                    Eigen::Index off = 0;
                    for (std::size_t i = 0; i < ids.size(); ++i) {
                      if (tp.requires_grad(ids[i])) tp.accumulate_grad(ids[i], g.middleCols(off, widths[i]));
                      off += widths[i];
                    }
                  },
                  "concat_cols");
}

Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(std::span<const Var>(parts));
}

Var gather_rows(Var a, std::vector<std::int32_t> index) {
  const auto n = a.rows();
  Tensor out = Tensor::Zero(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto r = index[i];
    if (r < -1 || r >= n) throw std::out_of_range("gather_rows index out of range");
    if (r >= 0) out.row(static_cast<Eigen::Index>(i)) = a.value().row(r);
  }
  const int ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [ia, index = std::move(index)](Tape& tp, const Tensor& g) {
                            const Tensor& x = tp.value(ia);
                            Tensor d = Tensor::Zero(x.rows(), x.cols());
                            for (std::size_t i = 0; i < index.size(); ++i) {
                              if (index[i] >= 0) d.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
                            }
                            tp.accumulate_grad(ia, d);
                          },
                          "gather_rows");
}

Var segment_sum(Var a, std::vector<std::int32_t> segment, std::int32_t num_segments) {
  require_shape(static_cast<Eigen::Index>(segment.size()) == a.rows(), "segment_sum");
  Tensor out = Tensor::Zero(num_segments, a.cols());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const auto s = segment[i];
    if (s < 0 || s >= num_segments) throw std::out_of_range("invalid segment id");
    out.row(s) += a.value().row(static_cast<Eigen::Index>(i));
  }
  const int ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [ia, segment = std::move(segment)](Tape& tp, const Tensor& g) {
                            Tensor d(static_cast<Eigen::Index>(segment.size()), g.cols());
                            for (std::size_t i = 0; i < segment.size(); ++i) {
                              d.row(static_cast<Eigen::Index>(i)) = g.row(segment[i]);
                            }
                            tp.accumulate_grad(ia, d);
                          },
                          "segment_sum");
}

Var segment_max(Var a, std::vector<std::int32_t> segment, std::int32_t num_segments) {
  require_shape(static_cast<Eigen::Index>(segment.size()) == a.rows(), "segment_max");
  const auto cols = a.cols();
  Tensor out = Tensor::Zero(num_segments, cols);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(num_segments * cols), -1);
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < segment.size(); ++i) {
    const auto s = segment[i];
    if (s < 0 || s >= num_segments) throw std::out_of_range("invalid segment id");
    for (Eigen::Index c = 0; c < cols; ++c) {
      auto& best = arg[static_cast<std::size_t>(s * cols + c)];
      if (best < 0 || x(static_cast<Eigen::Index>(i), c) > x(best, c)) best = static_cast<Eigen::Index>(i);
    }
  }
  for (std::int32_t s = 0; s < num_segments; ++s) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto best = arg[static_cast<std::size_t>(s * cols + c)];
      if (best >= 0) out(s, c) = x(best, c);
    }
  }
  const int ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [ia, arg = std::move(arg), cols, num_segments](Tape& tp, const Tensor& g) {
                            const Tensor& xv = tp.value(ia);
                            Tensor d = Tensor::Zero(xv.rows(), xv.cols());
                            for (std::int32_t s = 0; s < num_segments; ++s) {
                              for (Eigen::Index c = 0; c < cols; ++c) {
                                const auto best = arg[static_cast<std::size_t>(s * cols + c)];
                                if (best >= 0) d(best, c) += g(s, c);
                              }
                            }
                            tp.accumulate_grad(ia, d);
                          },
                          "segment_max");
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw std::invalid_argument("mean of an empty tensor");
  Tensor out(1, 1);
  out(0, 0) = a.value().sum() / n;
  const int ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [ia, n](Tape& tp, const Tensor& g) {
                            const Tensor& x = tp.value(ia);
                            tp.accumulate_grad(ia, Tensor::Constant(x.rows(), x.cols(), g(0, 0) / n));
                          },
                          "mean");
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  const Tensor& z = logits.value();
  require_shape(static_cast<Eigen::Index>(labels.size()) == z.size(), "bce_with_logits");
  if (z.size() == 0) throw std::invalid_argument("bce of an empty batch");
  Tensor y(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double l = labels[static_cast<std::size_t>(i)];
    if (l != 0.0 && l != 1.0) throw std::invalid_argument("bce labels must be 0 or 1");
    y.data()[i] = l;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double v = z.data()[i];
    total += std::max(v, 0.0) - v * y.data()[i] + std::log1p(std::exp(-std::abs(v)));
  }
  const double n = static_cast<double>(z.size());
  Tensor out(1, 1);
  out(0, 0) = total / n;
  const int iz = logits.id();
  return logits.tape()->record(std::move(out), {iz},
                               [iz, y = std::move(y), n](Tape& tp, const Tensor& g) {
                                 const Tensor& zv = tp.value(iz);
                                 Tensor d = zv.unaryExpr([](double v) { return sigmoid(v); }) - y;
                                 tp.accumulate_grad(iz, d * (g(0, 0) / n));
                               },
                               "bce_with_logits");
}

// ---------------------------------------------------------------------------

void Adam::step(ParamStore& params, const Gradients& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.get(name);
    if (p.rows() != g.rows() || p.cols() != g.cols()) throw std::invalid_argument("gradient shape mismatch for " + name);
    auto [it, fresh] = moments_.try_emplace(name, Tensor::Zero(p.rows(), p.cols()), Tensor::Zero(p.rows(), p.cols()));
    (void)fresh;
    auto& [m, v] = it->second;
    m = options_.beta1 * m + (1.0 - options_.beta1) * g;
    v = options_.beta2 * v + (1.0 - options_.beta2) * g.cwiseProduct(g);
    p.array() -= options_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.epsilon);
  }
}

Tensor xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

Tensor normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
  return t;
}

}  // namespace hkgc
