#pragma once

#include <cstddef>

namespace topomlp {

/// y = gelu(x), tanh approximation, over n entries. x and y may alias.
template <class T>
void gelu_forward(const T* x, T* y, std::size_t n);

/// out = g * gelu'(x). g and out may alias.
template <class T>
void gelu_backward(const T* x, const T* g, T* out, std::size_t n);

}  // namespace topomlp
