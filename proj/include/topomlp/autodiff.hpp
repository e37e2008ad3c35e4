#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "topomlp/complex.hpp"
#include "topomlp/matrix.hpp"
#include "topomlp/rng.hpp"

namespace topomlp::ad {

template <class T>
class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Matrix<T>& value() const { return tape->value(id); }
  /// Gradient after backward(); empty when no gradient reached this node.
  const Matrix<T>& grad() const { return tape->grad(id); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Reverse-mode gradient tape. Nodes are appended in evaluation order, so
/// the reverse of recording order is a valid topological order. One tape
/// records one forward pass and supports a single backward().
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value);
  Var<T> parameter(Matrix<T> value);

  /// Append an op result. `parents` feed `backward`; the node needs a gradient
  /// iff any parent does. Throws if `value` has a non-finite entry.
  Var<T> record(const char* op, Matrix<T> value, std::vector<std::size_t> parents, BackwardFn backward);

  void backward(Var<T> loss);

  const Matrix<T>& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix<T>& grad(std::size_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Add `g` into the gradient buffer of `id` (no-op for constants).
  void accumulate(std::size_t id, const Matrix<T>& g);
  void accumulate(std::size_t id, Matrix<T>&& g);

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    BackwardFn backward;
    bool needs_grad = false;
  };
  std::deque<Node> nodes_;  // deque: value() references survive later records
  bool backward_done_ = false;
};

template <class T> Var<T> matmul(Var<T> a, Var<T> b);
/// a * b^T
template <class T> Var<T> matmul_nt(Var<T> a, Var<T> b);
/// s * x, gradient to x only.
template <class T> Var<T> spmm(const SparseStructure& s, Var<T> x);
template <class T> Var<T> add(Var<T> a, Var<T> b);
template <class T> Var<T> scale(Var<T> a, T factor);
template <class T> Var<T> sum(Var<T> a);
template <class T> Var<T> sum_squares(Var<T> a);

/// Tanh-approximation GELU.
template <class T> Var<T> gelu(Var<T> x);
template <class T> T gelu_value(T x);

/// Inverted dropout; identity when `training` is false or p == 0.
template <class T> Var<T> dropout(Var<T> x, double p, bool training, Rng& rng);

/// Row / max(||row||_2, 1e-12).
template <class T> Var<T> row_l2_normalize(Var<T> x);

/// Mean negative log-likelihood of `labels[r]` over the rows `rows`.
template <class T>
Var<T> cross_entropy(Var<T> logits, std::span<const int> labels, std::span<const std::size_t> rows);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
};

/// Adam with L2 weight decay folded into the gradient.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// `grads[i]` may be empty (treated as zero).
  void step(std::span<Matrix<T>* const> params, std::span<const Matrix<T>* const> grads);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Matrix<T>> m_;
  std::vector<Matrix<T>> v_;
};

}  // namespace topomlp::ad
