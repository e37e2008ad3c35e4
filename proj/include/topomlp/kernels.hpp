#pragma once

#include "topomlp/complex.hpp"
#include "topomlp/matrix.hpp"

// Dense and sparse-dense products. `reference` holds plain serial loops kept
// as the test oracle; `parallel` holds the OpenMP kernels used everywhere
// else. Parallel kernels split work by output row and never reduce across
// threads, so results are bit-identical for any thread count.
namespace topomlp::kernels {

namespace reference {

template <class T> Matrix<T> gemm_nn(const Matrix<T>& a, const Matrix<T>& b);
template <class T> Matrix<T> gemm_nt(const Matrix<T>& a, const Matrix<T>& b);
template <class T> Matrix<T> gemm_tn(const Matrix<T>& a, const Matrix<T>& b);
template <class T> Matrix<T> spmm(const SparseStructure& s, const Matrix<T>& x);

}  // namespace reference

namespace parallel {

template <class T> Matrix<T> transpose(const Matrix<T>& a);
/// a * b
template <class T> Matrix<T> gemm_nn(const Matrix<T>& a, const Matrix<T>& b);
/// a * b^T
template <class T> Matrix<T> gemm_nt(const Matrix<T>& a, const Matrix<T>& b);
/// a^T * b
template <class T> Matrix<T> gemm_tn(const Matrix<T>& a, const Matrix<T>& b);
/// s * x
template <class T> Matrix<T> spmm(const SparseStructure& s, const Matrix<T>& x);

}  // namespace parallel

using parallel::gemm_nn;
using parallel::gemm_nt;
using parallel::gemm_tn;
using parallel::spmm;
using parallel::transpose;

/// Number of gemm/spmm calls made on the calling thread since the last reset.
std::size_t multiply_count();
void reset_multiply_count();

}  // namespace topomlp::kernels
