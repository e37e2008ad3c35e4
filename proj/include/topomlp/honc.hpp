#pragma once

#include <span>
#include <string>

#include "topomlp/autodiff.hpp"
#include "topomlp/complex.hpp"

namespace topomlp {

/// How per-column losses are combined into one term.
enum class HoncReduction { kSum, kMean };

struct HONCConfig {
  double mu_v = 2.0;
  double mu_e = 2.0;
  double mu_f = 2.0;
  double beta_v = 1.0;
  double beta_e = 1.0;
  double beta_f = 1.0;
  /// Drop i == j from the node-loss denominator.
  bool exclude_diagonal = true;
  /// Use the signed boundary matrix as edge-loss weights instead of |B1|.
  bool signed_b1 = false;
  HoncReduction reduction = HoncReduction::kSum;
};

struct HoncDiagnostics {
  std::size_t columns_used = 0;
  /// Columns with no positive in-batch weight; they contribute nothing.
  std::size_t columns_skipped = 0;
};

/// Row-wise cosine similarity: S[i][j] = cos(za_i, zb_j). Zero rows give 0.
template <class T>
ad::Var<T> similarity(ad::Var<T> za, ad::Var<T> zb);

/// Contrastive loss over the columns of S:
///   l_j = -log( sum_i M_ij exp(S_ij/mu) / sum_i exp(S_ij/mu) )
/// summed (or averaged) over columns with positive numerator weight. With
/// `exclude_diagonal` (square S only) i == j is left out of both sums.
template <class T>
ad::Var<T> honc_loss(ad::Var<T> s, const SparseStructure& weights, double mu, bool exclude_diagonal,
                     HoncReduction reduction = HoncReduction::kSum,
                     HoncDiagnostics* diagnostics = nullptr);

/// Batch-level structure aligned with the sampled embeddings.
struct BatchStructure {
  SparseStructure a0;   // T_v x T_v
  SparseStructure b1;   // T_v x T_e, signed
  SparseStructure b02;  // T_v x T_f
};

template <class T>
struct LossTerms {
  ad::Var<T> total;
  double l_v = 0.0;
  double l_e = 0.0;
  double l_f = 0.0;
  double ce = 0.0;
  HoncDiagnostics diag_v, diag_e, diag_f;
};

/// beta_v L_v + beta_e L_e + beta_f L_f + CE(y0 rows `ce_rows`). Terms with a
/// zero multiplier are not evaluated; an empty `ce_rows` drops the CE term.
/// `structure` must outlive the tape.
template <class T>
LossTerms<T> total_loss(const std::array<ad::Var<T>, 3>& z, ad::Var<T> y0, const BatchStructure& structure,
                        std::span<const int> labels, std::span<const std::size_t> ce_rows,
                        const HONCConfig& cfg);

}  // namespace topomlp
