#include "topomlp/kernels.hpp"

#include <string>

namespace topomlp::kernels {

namespace {

thread_local std::size_t t_multiplies = 0;

void check_inner(std::size_t lhs, std::size_t rhs, const char* op) {
  require(lhs == rhs, std::string(op) + ": inner dimension mismatch (" + std::to_string(lhs) +
                          " vs " + std::to_string(rhs) + ")");
}

}  // namespace

std::size_t multiply_count() { return t_multiplies; }
void reset_multiply_count() { t_multiplies = 0; }

namespace reference {

template <class T>
Matrix<T> gemm_nn(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.cols(), b.rows(), "gemm_nn");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

template <class T>
Matrix<T> gemm_nt(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.cols(), b.cols(), "gemm_nt");
  Matrix<T> c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
      c(i, j) = acc;
    }
  return c;
}

template <class T>
Matrix<T> gemm_tn(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.rows(), b.rows(), "gemm_tn");
  Matrix<T> c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < a.rows(); ++p) acc += a(p, i) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

template <class T>
Matrix<T> spmm(const SparseStructure& s, const Matrix<T>& x) {
  check_inner(s.cols(), x.rows(), "spmm");
  Matrix<T> out(s.rows(), x.cols());
  for (const auto& e : s.entries())
    for (std::size_t j = 0; j < x.cols(); ++j) out(e.row, j) += static_cast<T>(e.value) * x(e.col, j);
  return out;
}

}  // namespace reference

namespace parallel {

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  constexpr std::size_t kBlock = 32;
#pragma omp parallel for schedule(static)
  for (std::size_t jb = 0; jb < a.cols(); jb += kBlock)
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = jb; j < std::min(jb + kBlock, a.cols()); ++j) t(j, i) = a(i, j);
  return t;
}

namespace {

// Register tile: kMr rows of C by kNr columns, accumulated over the whole
// inner dimension before it is stored. `panel` is the k x kNr slice of B
// packed contiguously.
constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 64;

template <class T>
void tile_full(const T* a, const T* panel, T* c, std::size_t k, std::size_t n) {
  T acc[kMr][kNr] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const T* __restrict brow = panel + p * kNr;
    for (std::size_t r = 0; r < kMr; ++r) {
      const T av = a[r * k + p];
      for (std::size_t j = 0; j < kNr; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < kMr; ++r)
    for (std::size_t j = 0; j < kNr; ++j) c[r * n + j] = acc[r][j];
}

template <class T>
void tile_edge(const T* a, const T* panel, T* c, std::size_t k, std::size_t n, std::size_t rows,
               std::size_t cols) {
  T acc[kMr][kNr] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const T* brow = panel + p * kNr;
    for (std::size_t r = 0; r < rows; ++r) {
      const T av = a[r * k + p];
      for (std::size_t j = 0; j < kNr; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) c[r * n + j] = acc[r][j];
}

// Dot product in 16 interleaved partial sums, combined in a fixed order.
template <class T>
T dot(const T* x, const T* y, std::size_t k) {
  constexpr std::size_t kLanes = 16;
  T part[kLanes] = {};
  std::size_t p = 0;
  for (; p + kLanes <= k; p += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) part[l] += x[p + l] * y[p + l];
  for (std::size_t l = 0; p < k; ++p, ++l) part[l] += x[p] * y[p];
  T total = 0;
  for (std::size_t l = 0; l < kLanes; ++l) total += part[l];
  return total;
}

}  // namespace

template <class T>
Matrix<T> gemm_nn(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.cols(), b.rows(), "gemm_nn");
  ++t_multiplies;
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix<T> c(m, n);
  if (m == 0 || n == 0) return c;
  // Dense on purpose: cost does not depend on the values, so timings compare
  // models by their arithmetic alone. Work is split by output row only, so
  // results do not depend on the thread count.
  if (n < 16) {
    const auto bt = transpose(b);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = dot(a.data() + i * k, bt.data() + j * k, k);
    return c;
  }
  std::vector<T> panel(k * kNr);
  const std::size_t row_blocks = (m + kMr - 1) / kMr;
  for (std::size_t j0 = 0; j0 < n; j0 += kNr) {
    const std::size_t cols = std::min(kNr, n - j0);
    for (std::size_t p = 0; p < k; ++p) {
      const T* src = b.data() + p * n + j0;
      T* dst = panel.data() + p * kNr;
      std::copy_n(src, cols, dst);
      std::fill(dst + cols, dst + kNr, T{0});
    }
#pragma omp parallel for schedule(static)
    for (std::size_t ib = 0; ib < row_blocks; ++ib) {
      const std::size_t i0 = ib * kMr;
      const std::size_t rows = std::min(kMr, m - i0);
      const T* ap = a.data() + i0 * k;
      T* cp = c.data() + i0 * n + j0;
      if (rows == kMr && cols == kNr) {
        tile_full(ap, panel.data(), cp, k, n);
      } else {
        tile_edge(ap, panel.data(), cp, k, n, rows, cols);
      }
    }
  }
  return c;
}

template <class T>
Matrix<T> gemm_nt(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.cols(), b.cols(), "gemm_nt");
  return gemm_nn(a, transpose(b));
}

template <class T>
Matrix<T> gemm_tn(const Matrix<T>& a, const Matrix<T>& b) {
  check_inner(a.rows(), b.rows(), "gemm_tn");
  return gemm_nn(transpose(a), b);
}

template <class T>
Matrix<T> spmm(const SparseStructure& s, const Matrix<T>& x) {
  check_inner(s.cols(), x.rows(), "spmm");
  ++t_multiplies;
  const std::size_t n = x.cols();
  Matrix<T> out(s.rows(), n);
  const auto& entries = s.entries();
  const auto& ptr = s.row_ptr();
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t r = 0; r < s.rows(); ++r) {
    T* __restrict orow = out.data() + r * n;
    for (auto q = ptr[r]; q < ptr[r + 1]; ++q) {
      const T w = static_cast<T>(entries[q].value);
      const T* __restrict xrow = x.data() + static_cast<std::size_t>(entries[q].col) * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += w * xrow[j];
    }
  }
  return out;
}

}  // namespace parallel

#define TOPOMLP_INSTANTIATE(T)                                                     \
  template Matrix<T> reference::gemm_nn(const Matrix<T>&, const Matrix<T>&);      \
  template Matrix<T> reference::gemm_nt(const Matrix<T>&, const Matrix<T>&);      \
  template Matrix<T> reference::gemm_tn(const Matrix<T>&, const Matrix<T>&);      \
  template Matrix<T> reference::spmm(const SparseStructure&, const Matrix<T>&);   \
  template Matrix<T> parallel::transpose(const Matrix<T>&);                       \
  template Matrix<T> parallel::gemm_nn(const Matrix<T>&, const Matrix<T>&);       \
  template Matrix<T> parallel::gemm_nt(const Matrix<T>&, const Matrix<T>&);       \
  template Matrix<T> parallel::gemm_tn(const Matrix<T>&, const Matrix<T>&);       \
  template Matrix<T> parallel::spmm(const SparseStructure&, const Matrix<T>&);

TOPOMLP_INSTANTIATE(float)
TOPOMLP_INSTANTIATE(double)

#undef TOPOMLP_INSTANTIATE

}  // namespace topomlp::kernels
