#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "topomlp/matrix.hpp"

namespace topomlp {

using Index = std::uint32_t;
using Edge = std::array<Index, 2>;
using Triangle = std::array<Index, 3>;

/// Undirected simple graph. Edges are kept canonical: u < v, sorted, unique.
struct Graph {
  std::size_t n_vertices = 0;
  std::vector<Edge> edges;

  /// Validates and canonicalizes. Self-loops, duplicates (in either
  /// orientation) and out-of-range endpoints are rejected.
  static Graph make(std::size_t n_vertices, std::vector<Edge> edges);

  bool has_edge(Index u, Index v) const;
};

/// 2-dimensional simplicial complex with ascending-vertex reference
/// orientation. Edge and triangle lists are sorted, so list position is the
/// canonical simplex index.
struct SimplicialComplex2 {
  std::size_t n_vertices = 0;
  std::vector<Edge> edges;
  std::vector<Triangle> triangles;

  std::size_t count(int dim) const;
  std::optional<std::size_t> edge_index(Index u, Index v) const;
};

struct Triplet {
  Index row;
  Index col;
  float value;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Sparse matrix for the structure operators. Entries are stored sorted by
/// (row, col) with explicit zeros removed; a CSR view over the same order is
/// kept for row slicing.
class SparseStructure {
 public:
  SparseStructure() = default;
  SparseStructure(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Triplet>& entries() const { return entries_; }

  /// CSR arrays: entries of row r are entries()[row_ptr()[r] .. row_ptr()[r+1]).
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }

  float at(std::size_t r, std::size_t c) const;

  template <class T = double>
  Matrix<T> to_dense() const {
    Matrix<T> out(rows_, cols_);
    for (const auto& e : entries_) out(e.row, e.col) = static_cast<T>(e.value);
    return out;
  }

  SparseStructure transpose() const;
  SparseStructure abs() const;

  /// Rows `row_ids` and columns `col_ids` (both duplicate-free), renumbered
  /// to their positions in the id lists.
  SparseStructure submatrix(std::span<const std::size_t> row_ids,
                            std::span<const std::size_t> col_ids) const;

  /// One `row\tcol\tvalue` line per nonzero, sorted by (row, col).
  void write_coo(std::ostream& out) const;

  friend bool operator==(const SparseStructure&, const SparseStructure&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Triplet> entries_;
  std::vector<std::size_t> row_ptr_;
};

SparseStructure sparse_product(const SparseStructure& a, const SparseStructure& b);
SparseStructure sparse_sum(const SparseStructure& a, const SparseStructure& b);

SimplicialComplex2 build_clique_complex(const Graph& g);

SparseStructure adjacency_0(const SimplicialComplex2& c);
SparseStructure boundary_1(const SimplicialComplex2& c);
SparseStructure boundary_2(const SimplicialComplex2& c);
SparseStructure incidence_0_2(const SimplicialComplex2& c);
SparseStructure hodge_laplacian(const SimplicialComplex2& c, int k);

/// The three operators both models are built around.
struct StructureSet {
  SparseStructure a0;
  SparseStructure b1;
  SparseStructure b02;

  static StructureSet from(const SimplicialComplex2& c) {
    return {adjacency_0(c), boundary_1(c), incidence_0_2(c)};
  }
};

}  // namespace topomlp
