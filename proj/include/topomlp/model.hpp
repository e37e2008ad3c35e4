#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topomlp/autodiff.hpp"
#include "topomlp/checkpoint.hpp"
#include "topomlp/cochain.hpp"
#include "topomlp/complex.hpp"

namespace topomlp {

struct ModelDims {
  std::size_t d0 = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t hidden = 256;
  std::size_t classes = 0;
};

/// Topo-MLP weights. Every simplex dimension k has an input layer
/// (d_k -> hidden) and an embedding layer (hidden -> hidden) into one shared
/// embedding space; the classifier reads the node embeddings.
template <class T>
struct BasicTopoParams {
  std::array<Matrix<T>, 3> input;
  std::array<Matrix<T>, 3> embed;
  Matrix<T> head;

  std::vector<Matrix<T>*> all() {
    return {&input[0], &input[1], &input[2], &embed[0], &embed[1], &embed[2], &head};
  }
};
using TopoMLPParams = BasicTopoParams<float>;

/// Message-passing baseline: one branch per simplex dimension, summed after
/// the structure operators, then a linear classifier.
template <class T>
struct BasicBaseParams {
  std::array<Matrix<T>, 3> branch;
  Matrix<T> head;

  std::vector<Matrix<T>*> all() { return {&branch[0], &branch[1], &branch[2], &head}; }
};
using BaseSCNParams = BasicBaseParams<float>;

template <class U, class T>
BasicTopoParams<U> params_cast(const BasicTopoParams<T>& p) {
  BasicTopoParams<U> out;
  for (int k = 0; k < 3; ++k) {
    out.input[k] = matrix_cast<U>(p.input[k]);
    out.embed[k] = matrix_cast<U>(p.embed[k]);
  }
  out.head = matrix_cast<U>(p.head);
  return out;
}

/// Entries uniform in +-sqrt(6 / (rows + cols)).
Matrix<float> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

TopoMLPParams init_topo_params(const ModelDims& dims, std::uint64_t seed);
BaseSCNParams init_base_params(const ModelDims& dims, std::uint64_t seed);

std::vector<NamedTensor> to_tensors(const TopoMLPParams& p);
std::vector<NamedTensor> to_tensors(const BaseSCNParams& p);
TopoMLPParams topo_params_from(const std::vector<NamedTensor>& tensors);
BaseSCNParams base_params_from(const std::vector<NamedTensor>& tensors);

// --- training-time forward (on a tape) -------------------------------------

template <class T>
struct TopoVars {
  std::array<ad::Var<T>, 3> input;
  std::array<ad::Var<T>, 3> embed;
  ad::Var<T> head;
};

template <class T>
TopoVars<T> bind_parameters(ad::Tape<T>& tape, const BasicTopoParams<T>& p);

template <class T>
struct TopoOutputs {
  std::array<ad::Var<T>, 3> z;  // embeddings per dimension
  ad::Var<T> y0;                // node logits
};

/// X^{k,1} = dropout(gelu(X^k W^{k,0})), Z^k = X^{k,1} W^{k,1}, Y^0 = Z^0 W^{0,2}.
template <class T>
TopoOutputs<T> topo_forward(const std::array<ad::Var<T>, 3>& x, const TopoVars<T>& w,
                            double dropout, bool training, Rng& rng);

template <class T>
struct BaseVars {
  std::array<ad::Var<T>, 3> branch;
  ad::Var<T> head;
};

template <class T>
BaseVars<T> bind_parameters(ad::Tape<T>& tape, const BasicBaseParams<T>& p);

/// head(dropout(gelu(A0 X0 W0 + B1 X1 W1 + B02 X2 W2))). Dropout is identity
/// in eval mode. The structure set must outlive the tape.
template <class T>
ad::Var<T> base_forward(const std::array<ad::Var<T>, 3>& x, const StructureSet& s,
                        const BaseVars<T>& w, double dropout, bool training, Rng& rng);

// --- inference ---------------------------------------------------------------

struct InferenceStats {
  /// Products executed before the classifier head.
  std::size_t hidden_multiplies = 0;
  std::size_t head_multiplies = 0;
};

/// Node logits from node features alone.
Matrix<float> topo_node_logits(const Matrix<float>& x0, const TopoMLPParams& p,
                               InferenceStats* stats = nullptr);
std::vector<int> topo_infer_nodes(const Matrix<float>& x0, const TopoMLPParams& p,
                                  InferenceStats* stats = nullptr);

Matrix<float> base_logits(const CochainSet& x, const StructureSet& s, const BaseSCNParams& p,
                          InferenceStats* stats = nullptr);

std::vector<int> argmax_rows(const Matrix<float>& logits);

}  // namespace topomlp
