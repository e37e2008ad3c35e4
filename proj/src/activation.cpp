// Built with -ffast-math so tanh maps to the vector math library. Entries go
// through fixed 16-wide blocks (the tail is padded), so each value takes the
// same code path whatever its position, alignment or thread.

#include "topomlp/activation.hpp"

#include <algorithm>
#include <cmath>

namespace topomlp {

namespace {

constexpr std::size_t kBlock = 16;
constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kA = 0.044715;

// Out of line so every call site runs the same instructions.
template <class T>
[[gnu::noinline]] void forward_block(const T* x, T* y) {
  for (std::size_t i = 0; i < kBlock; ++i) {
    const T v = x[i];
    const T u = static_cast<T>(kC) * (v + static_cast<T>(kA) * v * v * v);
    y[i] = T(0.5) * v * (T(1) + std::tanh(u));
  }
}

template <class T>
[[gnu::noinline]] void backward_block(const T* x, const T* g, T* out) {
  for (std::size_t i = 0; i < kBlock; ++i) {
    const T v = x[i];
    const T th = std::tanh(static_cast<T>(kC) * (v + static_cast<T>(kA) * v * v * v));
    const T du = static_cast<T>(kC) * (T(1) + static_cast<T>(3 * kA) * v * v);
    out[i] = g[i] * (T(0.5) * (T(1) + th) + T(0.5) * v * (T(1) - th * th) * du);
  }
}

}  // namespace

template <class T>
void gelu_forward(const T* x, T* y, std::size_t n) {
  const std::size_t blocks = n / kBlock;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    alignas(64) T in[kBlock], res[kBlock];
    std::copy_n(x + b * kBlock, kBlock, in);
    forward_block(in, res);
    std::copy_n(res, kBlock, y + b * kBlock);
  }
  const std::size_t rest = n - blocks * kBlock;
  if (rest == 0) return;
  alignas(64) T in[kBlock] = {}, res[kBlock];
  std::copy_n(x + blocks * kBlock, rest, in);
  forward_block(in, res);
  std::copy_n(res, rest, y + blocks * kBlock);
}

template <class T>
void gelu_backward(const T* x, const T* g, T* out, std::size_t n) {
  const std::size_t blocks = n / kBlock;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    alignas(64) T in[kBlock], gr[kBlock], res[kBlock];
    std::copy_n(x + b * kBlock, kBlock, in);
    std::copy_n(g + b * kBlock, kBlock, gr);
    backward_block(in, gr, res);
    std::copy_n(res, kBlock, out + b * kBlock);
  }
  const std::size_t rest = n - blocks * kBlock;
  if (rest == 0) return;
  alignas(64) T in[kBlock] = {}, gr[kBlock] = {}, res[kBlock];
  std::copy_n(x + blocks * kBlock, rest, in);
  std::copy_n(g + blocks * kBlock, rest, gr);
  backward_block(in, gr, res);
  std::copy_n(res, rest, out + blocks * kBlock);
}

template void gelu_forward(const float*, float*, std::size_t);
template void gelu_forward(const double*, double*, std::size_t);
template void gelu_backward(const float*, const float*, float*, std::size_t);
template void gelu_backward(const double*, const double*, double*, std::size_t);

}  // namespace topomlp
