#include "topomlp/honc.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "topomlp/kernels.hpp"

namespace topomlp {

template <class T>
ad::Var<T> similarity(ad::Var<T> za, ad::Var<T> zb) {
  require(za.cols() == zb.cols(), "similarity: embedding dimensions differ (" +
                                      std::to_string(za.cols()) + " vs " + std::to_string(zb.cols()) + ")");
  return ad::matmul_nt(ad::row_l2_normalize(za), ad::row_l2_normalize(zb));
}

template <class T>
ad::Var<T> honc_loss(ad::Var<T> s, const SparseStructure& weights, double mu, bool exclude_diagonal,
                     HoncReduction reduction, HoncDiagnostics* diagnostics) {
  require(mu > 0.0, "honc_loss: temperature must be positive");
  require(s.rows() == weights.rows() && s.cols() == weights.cols(), "honc_loss: S and M shapes differ");
  require(!exclude_diagonal || s.rows() == s.cols(), "honc_loss: diagonal exclusion needs a square S");

  const std::size_t a = s.rows(), b = s.cols();
  // Work column-major: row j of `st` is column j of S.
  const auto st = kernels::transpose(s.value());
  const auto mt = weights.transpose();
  const auto& me = mt.entries();
  const auto& mp = mt.row_ptr();

  std::vector<double> column_loss(b, 0.0);
  std::vector<char> used(b, 0);
  // d loss_j / d S_ij, filled only for used columns.
  auto grad_t = std::make_shared<Matrix<T>>(b, a);

#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t j = 0; j < b; ++j) {
    const auto col = st.row(j);
    bool any_positive = false;
    for (auto q = mp[j]; q < mp[j + 1]; ++q)
      if (!(exclude_diagonal && me[q].col == j) && me[q].value > 0.0f) any_positive = true;
    if (!any_positive) continue;

    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a; ++i)
      if (!(exclude_diagonal && i == j)) shift = std::max(shift, static_cast<double>(col[i]) / mu);

    double den = 0.0;
    for (std::size_t i = 0; i < a; ++i)
      if (!(exclude_diagonal && i == j)) den += std::exp(static_cast<double>(col[i]) / mu - shift);
    double num = 0.0;
    for (auto q = mp[j]; q < mp[j + 1]; ++q) {
      if (exclude_diagonal && me[q].col == j) continue;
      num += me[q].value * std::exp(static_cast<double>(col[me[q].col]) / mu - shift);
    }
    if (!(num > 0.0)) continue;  // signed weights can cancel

    used[j] = 1;
    column_loss[j] = std::log(den) - std::log(num);
    auto g = grad_t->row(j);
    for (std::size_t i = 0; i < a; ++i)
      if (!(exclude_diagonal && i == j))
        g[i] = static_cast<T>(std::exp(static_cast<double>(col[i]) / mu - shift) / den / mu);
    for (auto q = mp[j]; q < mp[j + 1]; ++q) {
      if (exclude_diagonal && me[q].col == j) continue;
      const double e = std::exp(static_cast<double>(col[me[q].col]) / mu - shift);
      g[me[q].col] = static_cast<T>(g[me[q].col] - me[q].value * e / num / mu);
    }
  }

  double total = 0.0;
  std::size_t n_used = 0;
  for (std::size_t j = 0; j < b; ++j) {
    if (!used[j]) continue;
    total += column_loss[j];
    ++n_used;
  }
  if (diagnostics) {
    diagnostics->columns_used = n_used;
    diagnostics->columns_skipped = b - n_used;
  }
  const double factor = (reduction == HoncReduction::kMean && n_used > 0) ? 1.0 / static_cast<double>(n_used) : 1.0;

  return s.tape->record("honc_loss", Matrix<T>(1, 1, static_cast<T>(total * factor)), {s.id},
                        [s, grad_t, factor](ad::Tape<T>& t, std::size_t self) {
                          auto g = kernels::transpose(*grad_t);
                          const T k = static_cast<T>(factor) * t.grad(self)(0, 0);
                          for (auto& v : g.values()) v *= k;
                          t.accumulate(s.id, std::move(g));
                        });
}

template <class T>
LossTerms<T> total_loss(const std::array<ad::Var<T>, 3>& z, ad::Var<T> y0, const BatchStructure& structure,
                        std::span<const int> labels, std::span<const std::size_t> ce_rows,
                        const HONCConfig& cfg) {
  require(cfg.mu_v > 0 && cfg.mu_e > 0 && cfg.mu_f > 0, "total_loss: temperatures must be positive");
  require(cfg.beta_v >= 0 && cfg.beta_e >= 0 && cfg.beta_f >= 0, "total_loss: multipliers must be >= 0");
  auto& tape = *y0.tape;
  LossTerms<T> out;
  std::vector<ad::Var<T>> terms;

  if (cfg.beta_v > 0) {
    auto l = honc_loss(similarity(z[0], z[0]), structure.a0, cfg.mu_v, cfg.exclude_diagonal, cfg.reduction,
                       &out.diag_v);
    out.l_v = l.value()(0, 0);
    terms.push_back(ad::scale(l, static_cast<T>(cfg.beta_v)));
  }
  if (cfg.beta_e > 0) {
    // The loss gradient is formed eagerly, so a temporary weight matrix is fine.
    auto l = honc_loss(similarity(z[0], z[1]), cfg.signed_b1 ? structure.b1 : structure.b1.abs(), cfg.mu_e,
                       false, cfg.reduction, &out.diag_e);
    out.l_e = l.value()(0, 0);
    terms.push_back(ad::scale(l, static_cast<T>(cfg.beta_e)));
  }
  if (cfg.beta_f > 0) {
    auto l = honc_loss(similarity(z[0], z[2]), structure.b02, cfg.mu_f, false, cfg.reduction, &out.diag_f);
    out.l_f = l.value()(0, 0);
    terms.push_back(ad::scale(l, static_cast<T>(cfg.beta_f)));
  }
  if (!ce_rows.empty()) {
    auto ce = ad::cross_entropy(y0, labels, ce_rows);
    out.ce = ce.value()(0, 0);
    terms.push_back(ce);
  }

  if (terms.empty()) {
    out.total = tape.constant(Matrix<T>(1, 1));
    return out;
  }
  out.total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) out.total = ad::add(out.total, terms[i]);
  return out;
}

#define TOPOMLP_INSTANTIATE(T)                                                                         \
  template ad::Var<T> similarity(ad::Var<T>, ad::Var<T>);                                              \
  template ad::Var<T> honc_loss(ad::Var<T>, const SparseStructure&, double, bool, HoncReduction,       \
                                HoncDiagnostics*);                                                     \
  template LossTerms<T> total_loss(const std::array<ad::Var<T>, 3>&, ad::Var<T>, const BatchStructure&, \
                                   std::span<const int>, std::span<const std::size_t>, const HONCConfig&);

TOPOMLP_INSTANTIATE(float)
TOPOMLP_INSTANTIATE(double)

#undef TOPOMLP_INSTANTIATE

}  // namespace topomlp
