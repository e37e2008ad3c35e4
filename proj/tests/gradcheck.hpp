#pragma once

// Finite-difference gradient checker for tape ops.

#include <functional>
#include <vector>

#include "oracles.hpp"
#include "topomlp/autodiff.hpp"

namespace gradcheck {

using topomlp::Matrix;
using topomlp::ad::Tape;
using topomlp::ad::Var;

/// sum_ij x_ij * r_ij, so every output entry gets its own random weight.
template <class T>
Var<T> weighted_sum(Var<T> x, const Matrix<T>& r) {
  T acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += x.value().data()[i] * r.data()[i];
  return x.tape->record("weighted_sum", Matrix<T>(1, 1, acc), {x.id}, [x, r](Tape<T>& t, std::size_t self) {
    Matrix<T> g = r;
    const T up = t.grad(self)(0, 0);
    for (auto& v : g.values()) v *= up;
    t.accumulate(x.id, std::move(g));
  });
}

template <class T>
using Builder = std::function<Var<T>(Tape<T>&, const std::vector<Var<T>>&)>;

struct Result {
  double max_error = 0.0;  // norm-wise relative error
  std::size_t entries = 0;
};

/// Compares tape gradients of weighted_sum(f(inputs)) with central
/// differences of step `h`. The error is ||a - n|| / max(||a||, ||n||) over
/// all input entries.
template <class T>
Result check(std::vector<Matrix<T>> inputs, const Builder<T>& f, double h, std::uint64_t seed = 1) {
  Matrix<T> r;
  auto evaluate = [&](bool with_grad, std::vector<Matrix<T>>* grads) {
    Tape<T> tape;
    std::vector<Var<T>> vars;
    for (const auto& m : inputs) vars.push_back(tape.parameter(m));
    auto out = f(tape, vars);
    if (r.empty()) {
      topomlp::Rng rng(seed);
      r = Matrix<T>(out.rows(), out.cols());
      for (auto& v : r.values()) v = static_cast<T>(rng.uniform(-1, 1));
    }
    auto loss = weighted_sum(out, r);
    if (with_grad) {
      tape.backward(loss);
      for (const auto& v : vars)
        grads->push_back(v.grad().empty() ? Matrix<T>(v.rows(), v.cols()) : v.grad());
    }
    return static_cast<double>(loss.value()(0, 0));
  };
  std::vector<Matrix<T>> analytic;
  evaluate(true, &analytic);
  Result res;
  double diff = 0, norm_a = 0, norm_n = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const T keep = inputs[k].data()[i];
      inputs[k].data()[i] = static_cast<T>(keep + h);
      const double up = evaluate(false, nullptr);
      inputs[k].data()[i] = static_cast<T>(keep - h);
      const double down = evaluate(false, nullptr);
      inputs[k].data()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[k].data()[i];
      diff += (a - numeric) * (a - numeric);
      norm_a += a * a;
      norm_n += numeric * numeric;
      ++res.entries;
    }
  }
  const double scale = std::sqrt(std::max(norm_a, norm_n));
  res.max_error = scale == 0 ? 0 : std::sqrt(diff) / scale;
  return res;
}

template <class T>
constexpr double step() { return std::is_same_v<T, float> ? 1e-2 : 1e-5; }

template <class T>
Matrix<T> random(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  topomlp::Rng rng(seed);
  return topomlp::matrix_cast<T>(oracle::random_dense(r, c, rng, scale));
}

}  // namespace gradcheck
