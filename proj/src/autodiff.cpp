#include "topomlp/autodiff.hpp"

#include "topomlp/activation.hpp"

#include <cmath>
#include <numbers>

#include "topomlp/kernels.hpp"

namespace topomlp::ad {

namespace {

template <class T>
bool all_finite(const Matrix<T>& m) {
  for (auto v : m.values())
    if (!std::isfinite(v)) return false;
  return true;
}

template <class T>
void add_into(Matrix<T>& dst, const Matrix<T>& src) {
  auto* d = dst.data();
  const auto* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

template <class T>
Matrix<T> scalar(T v) {
  return Matrix<T>(1, 1, v);
}

}  // namespace

// --- tape ------------------------------------------------------------------

template <class T>
Var<T> Tape<T>::constant(Matrix<T> value) {
  require(all_finite(value), "tape: non-finite constant");
  nodes_.push_back({std::move(value), {}, {}, false});
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::parameter(Matrix<T> value) {
  require(all_finite(value), "tape: non-finite parameter");
  nodes_.push_back({std::move(value), {}, {}, true});
  return {this, nodes_.size() - 1};
}

template <class T>
Var<T> Tape<T>::record(const char* op, Matrix<T> value, std::vector<std::size_t> parents,
                       BackwardFn backward) {
  require(!backward_done_, "tape: cannot record after backward()");
  if (!all_finite(value)) throw Error(std::string(op) + ": produced a non-finite value");
  bool needs = false;
  for (auto p : parents) needs = needs || nodes_.at(p).needs_grad;
  nodes_.push_back({std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, needs});
  return {this, nodes_.size() - 1};
}

template <class T>
void Tape<T>::accumulate(std::size_t id, const Matrix<T>& g) {
  auto& node = nodes_[id];
  if (!node.needs_grad) return;
  require(g.rows() == node.value.rows() && g.cols() == node.value.cols(),
          "tape: gradient shape mismatch");
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = g;
  } else {
    add_into(node.grad, g);
  }
}

template <class T>
void Tape<T>::accumulate(std::size_t id, Matrix<T>&& g) {
  auto& node = nodes_[id];
  if (!node.needs_grad) return;
  require(g.rows() == node.value.rows() && g.cols() == node.value.cols(),
          "tape: gradient shape mismatch");
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = std::move(g);
  } else {
    add_into(node.grad, g);
  }
}

template <class T>
void Tape<T>::backward(Var<T> loss) {
  require(loss.tape == this, "backward: loss belongs to another tape");
  require(!backward_done_, "backward: already called on this tape");
  require(loss.rows() == 1 && loss.cols() == 1, "backward: loss must be a scalar");
  backward_done_ = true;
  for (auto& n : nodes_) n.grad = Matrix<T>();
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad = scalar<T>(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

// --- ops -------------------------------------------------------------------

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  auto out = kernels::gemm_nn(a.value(), b.value());
  return a.tape->record("matmul", std::move(out), {a.id, b.id}, [a, b](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.needs_grad(a.id)) t.accumulate(a.id, kernels::gemm_nt(g, b.value()));
    if (t.needs_grad(b.id)) t.accumulate(b.id, kernels::gemm_tn(a.value(), g));
  });
}

template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  auto out = kernels::gemm_nt(a.value(), b.value());
  return a.tape->record("matmul_nt", std::move(out), {a.id, b.id}, [a, b](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.needs_grad(a.id)) t.accumulate(a.id, kernels::gemm_nn(g, b.value()));
    if (t.needs_grad(b.id)) t.accumulate(b.id, kernels::gemm_tn(g, a.value()));
  });
}

template <class T>
Var<T> spmm(const SparseStructure& s, Var<T> x) {
  auto out = kernels::spmm(s, x.value());
  return x.tape->record("spmm", std::move(out), {x.id}, [&s, x](Tape<T>& t, std::size_t self) {
    t.accumulate(x.id, kernels::spmm(s.transpose(), t.grad(self)));
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Matrix<T> out = a.value();
  add_into(out, b.value());
  return a.tape->record("add", std::move(out), {a.id, b.id}, [a, b](Tape<T>& t, std::size_t self) {
    t.accumulate(a.id, t.grad(self));
    t.accumulate(b.id, t.grad(self));
  });
}

template <class T>
Var<T> scale(Var<T> a, T factor) {
  Matrix<T> out = a.value();
  for (auto& v : out.values()) v *= factor;
  return a.tape->record("scale", std::move(out), {a.id}, [a, factor](Tape<T>& t, std::size_t self) {
    Matrix<T> g = t.grad(self);
    for (auto& v : g.values()) v *= factor;
    t.accumulate(a.id, std::move(g));
  });
}

template <class T>
Var<T> sum(Var<T> a) {
  double s = 0.0;
  for (auto v : a.value().values()) s += v;
  return a.tape->record("sum", scalar<T>(static_cast<T>(s)), {a.id}, [a](Tape<T>& t, std::size_t self) {
    t.accumulate(a.id, Matrix<T>(a.rows(), a.cols(), t.grad(self)(0, 0)));
  });
}

template <class T>
Var<T> sum_squares(Var<T> a) {
  double s = 0.0;
  for (auto v : a.value().values()) s += static_cast<double>(v) * v;
  return a.tape->record("sum_squares", scalar<T>(static_cast<T>(s)), {a.id},
                        [a](Tape<T>& t, std::size_t self) {
                          Matrix<T> g = a.value();
                          const T k = 2 * t.grad(self)(0, 0);
                          for (auto& v : g.values()) v *= k;
                          t.accumulate(a.id, std::move(g));
                        });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

template <class T>
T gelu_value(T x) {
  const T u = static_cast<T>(kGeluC) * (x + static_cast<T>(kGeluA) * x * x * x);
  return T(0.5) * x * (T(1) + std::tanh(u));
}

template <class T>
Var<T> gelu(Var<T> x) {
  Matrix<T> out(x.rows(), x.cols());
  gelu_forward(x.value().data(), out.data(), out.size());
  return x.tape->record("gelu", std::move(out), {x.id}, [x](Tape<T>& t, std::size_t self) {
    Matrix<T> g = t.grad(self);
    gelu_backward(x.value().data(), g.data(), g.data(), g.size());
    t.accumulate(x.id, std::move(g));
  });
}

template <class T>
Var<T> dropout(Var<T> x, double p, bool training, Rng& rng) {
  require(p >= 0.0 && p < 1.0, "dropout: rate must be in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  Matrix<T> mask(x.rows(), x.cols());
  for (auto& m : mask.values()) m = rng.uniform() < p ? T(0) : keep_scale;
  Matrix<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask.data()[i];
  return x.tape->record("dropout", std::move(out), {x.id},
                        [x, mask = std::move(mask)](Tape<T>& t, std::size_t self) {
                          Matrix<T> g = t.grad(self);
                          for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] *= mask.data()[i];
                          t.accumulate(x.id, std::move(g));
                        });
}

template <class T>
Var<T> row_l2_normalize(Var<T> x) {
  constexpr double kEps = 1e-12;
  const auto& in = x.value();
  std::vector<T> norms(in.rows());
  Matrix<T> out(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    double s = 0.0;
    for (auto v : in.row(r)) s += static_cast<double>(v) * v;
    norms[r] = static_cast<T>(std::max(std::sqrt(s), kEps));
    auto o = out.row(r);
    auto i = in.row(r);
    for (std::size_t c = 0; c < in.cols(); ++c) o[c] = i[c] / norms[r];
  }
  return x.tape->record("row_l2_normalize", std::move(out), {x.id},
                        [x, norms = std::move(norms)](Tape<T>& t, std::size_t self) {
                          const auto& y = t.value(self);
                          Matrix<T> g = t.grad(self);
                          for (std::size_t r = 0; r < g.rows(); ++r) {
                            auto gr = g.row(r);
                            auto yr = y.row(r);
                            if (norms[r] <= static_cast<T>(kEps)) {
                              for (auto& v : gr) v /= norms[r];
                              continue;
                            }
                            T dot = 0;
                            for (std::size_t c = 0; c < gr.size(); ++c) dot += yr[c] * gr[c];
                            for (std::size_t c = 0; c < gr.size(); ++c) gr[c] = (gr[c] - yr[c] * dot) / norms[r];
                          }
                          t.accumulate(x.id, std::move(g));
                        });
}

template <class T>
Var<T> cross_entropy(Var<T> logits, std::span<const int> labels, std::span<const std::size_t> rows) {
  require(!rows.empty(), "cross_entropy: empty mask");
  require(labels.size() == logits.rows(), "cross_entropy: label count != logit rows");
  const auto& z = logits.value();
  const std::size_t classes = z.cols();
  Matrix<T> probs(rows.size(), classes);
  double total = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    require(r < z.rows(), "cross_entropy: row out of range");
    require(labels[r] >= 0 && static_cast<std::size_t>(labels[r]) < classes,
            "cross_entropy: invalid label at row " + std::to_string(r));
    const auto zr = z.row(r);
    double mx = zr[0];
    for (auto v : zr) mx = std::max(mx, static_cast<double>(v));
    double se = 0.0;
    for (auto v : zr) se += std::exp(static_cast<double>(v) - mx);
    const double lse = mx + std::log(se);
    total += lse - zr[static_cast<std::size_t>(labels[r])];
    for (std::size_t c = 0; c < classes; ++c)
      probs(k, c) = static_cast<T>(std::exp(static_cast<double>(zr[c]) - lse));
  }
  const double mean = total / static_cast<double>(rows.size());
  std::vector<std::size_t> row_copy(rows.begin(), rows.end());
  std::vector<int> label_copy;
  label_copy.reserve(rows.size());
  for (auto r : rows) label_copy.push_back(labels[r]);
  return logits.tape->record(
      "cross_entropy", scalar<T>(static_cast<T>(mean)), {logits.id},
      [logits, probs = std::move(probs), row_copy = std::move(row_copy),
       label_copy = std::move(label_copy)](Tape<T>& t, std::size_t self) {
        const T k = t.grad(self)(0, 0) / static_cast<T>(row_copy.size());
        Matrix<T> g(logits.rows(), logits.cols());
        for (std::size_t i = 0; i < row_copy.size(); ++i) {
          auto gr = g.row(row_copy[i]);
          for (std::size_t c = 0; c < gr.size(); ++c) gr[c] += k * probs(i, c);
          gr[static_cast<std::size_t>(label_copy[i])] -= k;
        }
        t.accumulate(logits.id, std::move(g));
      });
}

// --- adam ------------------------------------------------------------------

template <class T>
void Adam<T>::step(std::span<Matrix<T>* const> params, std::span<const Matrix<T>* const> grads) {
  require(params.size() == grads.size(), "adam: params/grads count mismatch");
  if (m_.empty()) {
    for (auto* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  require(m_.size() == params.size(), "adam: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    const auto* g = grads[i];
    require(m_[i].same_shape(p), "adam: parameter shape changed");
    require(g->empty() || g->same_shape(p), "adam: gradient shape mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = (g->empty() ? 0.0 : static_cast<double>(g->data()[k])) +
                        cfg_.weight_decay * static_cast<double>(p.data()[k]);
      const double m = cfg_.beta1 * m_[i].data()[k] + (1.0 - cfg_.beta1) * gk;
      const double v = cfg_.beta2 * v_[i].data()[k] + (1.0 - cfg_.beta2) * gk * gk;
      m_[i].data()[k] = static_cast<T>(m);
      v_[i].data()[k] = static_cast<T>(v);
      const double update = cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
      p.data()[k] = static_cast<T>(p.data()[k] - update);
    }
  }
}

#define TOPOMLP_INSTANTIATE(T)                                                               \
  template class Tape<T>;                                                                    \
  template class Adam<T>;                                                                    \
  template Var<T> matmul(Var<T>, Var<T>);                                                    \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                                 \
  template Var<T> spmm(const SparseStructure&, Var<T>);                                      \
  template Var<T> add(Var<T>, Var<T>);                                                       \
  template Var<T> scale(Var<T>, T);                                                          \
  template Var<T> sum(Var<T>);                                                               \
  template Var<T> sum_squares(Var<T>);                                                       \
  template Var<T> gelu(Var<T>);                                                              \
  template T gelu_value(T);                                                                  \
  template Var<T> dropout(Var<T>, double, bool, Rng&);                                       \
  template Var<T> row_l2_normalize(Var<T>);                                                  \
  template Var<T> cross_entropy(Var<T>, std::span<const int>, std::span<const std::size_t>);

TOPOMLP_INSTANTIATE(float)
TOPOMLP_INSTANTIATE(double)

#undef TOPOMLP_INSTANTIATE

}  // namespace topomlp::ad
