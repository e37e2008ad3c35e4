#include "topomlp/model.hpp"

#include "topomlp/activation.hpp"

#include <cmath>
#include <map>

#include "topomlp/kernels.hpp"

namespace topomlp {

Matrix<float> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  require(rows > 0 && cols > 0, "glorot_uniform: zero dimension");
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<float> w(rows, cols);
  for (auto& v : w.values()) v = static_cast<float>(rng.uniform(-limit, limit));
  return w;
}

TopoMLPParams init_topo_params(const ModelDims& dims, std::uint64_t seed) {
  require(dims.d0 > 0 && dims.d1 > 0 && dims.d2 > 0 && dims.hidden > 0 && dims.classes > 0,
          "init_topo_params: all dimensions must be positive");
  Rng rng(seed);
  TopoMLPParams p;
  const std::array<std::size_t, 3> d{dims.d0, dims.d1, dims.d2};
  for (int k = 0; k < 3; ++k) p.input[k] = glorot_uniform(d[k], dims.hidden, rng);
  for (int k = 0; k < 3; ++k) p.embed[k] = glorot_uniform(dims.hidden, dims.hidden, rng);
  p.head = glorot_uniform(dims.hidden, dims.classes, rng);
  return p;
}

BaseSCNParams init_base_params(const ModelDims& dims, std::uint64_t seed) {
  require(dims.d0 > 0 && dims.d1 > 0 && dims.d2 > 0 && dims.hidden > 0 && dims.classes > 0,
          "init_base_params: all dimensions must be positive");
  Rng rng(seed);
  BaseSCNParams p;
  const std::array<std::size_t, 3> d{dims.d0, dims.d1, dims.d2};
  for (int k = 0; k < 3; ++k) p.branch[k] = glorot_uniform(d[k], dims.hidden, rng);
  p.head = glorot_uniform(dims.hidden, dims.classes, rng);
  return p;
}

std::vector<NamedTensor> to_tensors(const TopoMLPParams& p) {
  std::vector<NamedTensor> t;
  for (int k = 0; k < 3; ++k) t.push_back({"input." + std::to_string(k), p.input[k]});
  for (int k = 0; k < 3; ++k) t.push_back({"embed." + std::to_string(k), p.embed[k]});
  t.push_back({"head", p.head});
  return t;
}

std::vector<NamedTensor> to_tensors(const BaseSCNParams& p) {
  std::vector<NamedTensor> t;
  for (int k = 0; k < 3; ++k) t.push_back({"branch." + std::to_string(k), p.branch[k]});
  t.push_back({"head", p.head});
  return t;
}

namespace {

const Matrix<float>& find(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw Error("checkpoint is missing tensor '" + name + "'");
}

}  // namespace

TopoMLPParams topo_params_from(const std::vector<NamedTensor>& tensors) {
  TopoMLPParams p;
  for (int k = 0; k < 3; ++k) {
    p.input[k] = find(tensors, "input." + std::to_string(k));
    p.embed[k] = find(tensors, "embed." + std::to_string(k));
  }
  p.head = find(tensors, "head");
  return p;
}

BaseSCNParams base_params_from(const std::vector<NamedTensor>& tensors) {
  BaseSCNParams p;
  for (int k = 0; k < 3; ++k) p.branch[k] = find(tensors, "branch." + std::to_string(k));
  p.head = find(tensors, "head");
  return p;
}

template <class T>
TopoVars<T> bind_parameters(ad::Tape<T>& tape, const BasicTopoParams<T>& p) {
  TopoVars<T> w;
  for (int k = 0; k < 3; ++k) w.input[k] = tape.parameter(p.input[k]);
  for (int k = 0; k < 3; ++k) w.embed[k] = tape.parameter(p.embed[k]);
  w.head = tape.parameter(p.head);
  return w;
}

template <class T>
TopoOutputs<T> topo_forward(const std::array<ad::Var<T>, 3>& x, const TopoVars<T>& w,
                            double dropout, bool training, Rng& rng) {
  TopoOutputs<T> out;
  for (int k = 0; k < 3; ++k) {
    auto h = ad::dropout(ad::gelu(ad::matmul(x[k], w.input[k])), dropout, training, rng);
    out.z[k] = ad::matmul(h, w.embed[k]);
  }
  out.y0 = ad::matmul(out.z[0], w.head);
  return out;
}

template <class T>
BaseVars<T> bind_parameters(ad::Tape<T>& tape, const BasicBaseParams<T>& p) {
  BaseVars<T> w;
  for (int k = 0; k < 3; ++k) w.branch[k] = tape.parameter(p.branch[k]);
  w.head = tape.parameter(p.head);
  return w;
}

template <class T>
ad::Var<T> base_forward(const std::array<ad::Var<T>, 3>& x, const StructureSet& s,
                        const BaseVars<T>& w, double dropout, bool training, Rng& rng) {
  require(s.a0.rows() == x[0].rows() && s.b1.rows() == x[0].rows() && s.b02.rows() == x[0].rows(),
          "base_forward: structure rows must equal the vertex count");
  auto m0 = ad::spmm(s.a0, ad::matmul(x[0], w.branch[0]));
  auto m1 = ad::spmm(s.b1, ad::matmul(x[1], w.branch[1]));
  auto m2 = ad::spmm(s.b02, ad::matmul(x[2], w.branch[2]));
  auto h = ad::dropout(ad::gelu(ad::add(ad::add(m0, m1), m2)), dropout, training, rng);
  return ad::matmul(h, w.head);
}

namespace {

void gelu_inplace(Matrix<float>& m) { gelu_forward(m.data(), m.data(), m.size()); }

}  // namespace

Matrix<float> topo_node_logits(const Matrix<float>& x0, const TopoMLPParams& p, InferenceStats* stats) {
  const auto before = kernels::multiply_count();
  auto h = kernels::gemm_nn(x0, p.input[0]);
  gelu_inplace(h);
  const auto z = kernels::gemm_nn(h, p.embed[0]);
  const auto hidden_done = kernels::multiply_count();
  auto y = kernels::gemm_nn(z, p.head);
  if (stats) {
    stats->hidden_multiplies = hidden_done - before;
    stats->head_multiplies = kernels::multiply_count() - hidden_done;
  }
  return y;
}

std::vector<int> topo_infer_nodes(const Matrix<float>& x0, const TopoMLPParams& p, InferenceStats* stats) {
  return argmax_rows(topo_node_logits(x0, p, stats));
}

Matrix<float> base_logits(const CochainSet& x, const StructureSet& s, const BaseSCNParams& p,
                          InferenceStats* stats) {
  require(s.a0.rows() == x.x0.data.rows() && s.b1.rows() == x.x0.data.rows() &&
              s.b02.rows() == x.x0.data.rows(),
          "base_logits: structure rows must equal the vertex count");
  const auto before = kernels::multiply_count();
  auto h = kernels::spmm(s.a0, kernels::gemm_nn(x.x0.data, p.branch[0]));
  const auto m1 = kernels::spmm(s.b1, kernels::gemm_nn(x.x1.data, p.branch[1]));
  const auto m2 = kernels::spmm(s.b02, kernels::gemm_nn(x.x2.data, p.branch[2]));
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] += m1.data()[i] + m2.data()[i];
  gelu_inplace(h);
  const auto hidden_done = kernels::multiply_count();
  auto y = kernels::gemm_nn(h, p.head);
  if (stats) {
    stats->hidden_multiplies = hidden_done - before;
    stats->head_multiplies = kernels::multiply_count() - hidden_done;
  }
  return y;
}

std::vector<int> argmax_rows(const Matrix<float>& logits) {
  std::vector<int> out(logits.rows(), 0);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[static_cast<std::size_t>(out[r])]) out[r] = static_cast<int>(c);
  }
  return out;
}

#define TOPOMLP_INSTANTIATE(T)                                                                    \
  template TopoVars<T> bind_parameters(ad::Tape<T>&, const BasicTopoParams<T>&);                  \
  template BaseVars<T> bind_parameters(ad::Tape<T>&, const BasicBaseParams<T>&);                  \
  template TopoOutputs<T> topo_forward(const std::array<ad::Var<T>, 3>&, const TopoVars<T>&,      \
                                       double, bool, Rng&);                                       \
  template ad::Var<T> base_forward(const std::array<ad::Var<T>, 3>&, const StructureSet&,         \
                                   const BaseVars<T>&, double, bool, Rng&);

TOPOMLP_INSTANTIATE(float)
TOPOMLP_INSTANTIATE(double)

#undef TOPOMLP_INSTANTIATE

}  // namespace topomlp
