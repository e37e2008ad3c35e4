#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "topomlp/error.hpp"

namespace topomlp {

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, "matrix data size does not match shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class U, class T>
Matrix<U> matrix_cast(const Matrix<T>& m) {
  Matrix<U> out(m.rows(), m.cols());
  std::transform(m.values().begin(), m.values().end(), out.values().begin(),
                 [](T v) { return static_cast<U>(v); });
  return out;
}

/// Rows of `m` at `ids`, in that order.
template <class T>
Matrix<T> gather_rows(const Matrix<T>& m, std::span<const std::size_t> ids) {
  Matrix<T> out(ids.size(), m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < m.rows(), "gather_rows: index out of range");
    std::copy_n(m.row(ids[i]).data(), m.cols(), out.row(i).data());
  }
  return out;
}

}  // namespace topomlp
