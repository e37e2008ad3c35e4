#include "topomlp/complex.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace topomlp {

Graph Graph::make(std::size_t n_vertices, std::vector<Edge> edges) {
  for (auto& e : edges) {
    require(e[0] != e[1], "graph: self-loop at vertex " + std::to_string(e[0]));
    require(e[0] < n_vertices && e[1] < n_vertices,
            "graph: edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
                ") references a vertex >= " + std::to_string(n_vertices));
    if (e[0] > e[1]) std::swap(e[0], e[1]);
  }
  std::sort(edges.begin(), edges.end());
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  require(dup == edges.end(), dup == edges.end() ? "" :
          "graph: duplicate edge (" + std::to_string((*dup)[0]) + "," +
              std::to_string((*dup)[1]) + ")");
  return Graph{n_vertices, std::move(edges)};
}

bool Graph::has_edge(Index u, Index v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
}

std::size_t SimplicialComplex2::count(int dim) const {
  switch (dim) {
    case 0: return n_vertices;
    case 1: return edges.size();
    case 2: return triangles.size();
    default: return 0;
  }
}

std::optional<std::size_t> SimplicialComplex2::edge_index(Index u, Index v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), Edge{u, v});
  if (it == edges.end() || *it != Edge{u, v}) return std::nullopt;
  return static_cast<std::size_t>(it - edges.begin());
}

// ---------------------------------------------------------------------------

SparseStructure::SparseStructure(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  std::erase_if(entries, [](const Triplet& t) { return t.value == 0.0f; });
  for (const auto& t : entries) {
    require(t.row < rows && t.col < cols, "sparse: entry index out of range");
    require(std::isfinite(t.value), "sparse: non-finite entry");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    require(entries[i].row != entries[i - 1].row || entries[i].col != entries[i - 1].col,
            "sparse: duplicate coordinate");
  }
  entries_ = std::move(entries);
  row_ptr_.assign(rows_ + 1, 0);
  for (const auto& t : entries_) ++row_ptr_[t.row + 1];
  for (std::size_t r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

float SparseStructure::at(std::size_t r, std::size_t c) const {
  require(r < rows_ && c < cols_, "sparse: index out of range");
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  auto it = std::lower_bound(first, last, c,
                             [](const Triplet& t, std::size_t col) { return t.col < col; });
  return (it != last && it->col == c) ? it->value : 0.0f;
}

SparseStructure SparseStructure::transpose() const {
  std::vector<Triplet> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.push_back({e.col, e.row, e.value});
  return {cols_, rows_, std::move(t)};
}

SparseStructure SparseStructure::abs() const {
  auto t = entries_;
  for (auto& e : t) e.value = std::fabs(e.value);
  return {rows_, cols_, std::move(t)};
}

SparseStructure SparseStructure::submatrix(std::span<const std::size_t> row_ids,
                                           std::span<const std::size_t> col_ids) const {
  constexpr auto kAbsent = static_cast<Index>(-1);
  std::vector<Index> col_map(cols_, kAbsent);
  for (std::size_t j = 0; j < col_ids.size(); ++j) {
    require(col_ids[j] < cols_, "submatrix: column id out of range");
    require(col_map[col_ids[j]] == kAbsent, "submatrix: duplicate column id");
    col_map[col_ids[j]] = static_cast<Index>(j);
  }
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    const auto r = row_ids[i];
    require(r < rows_, "submatrix: row id out of range");
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto& e = entries_[k];
      if (col_map[e.col] != kAbsent) out.push_back({static_cast<Index>(i), col_map[e.col], e.value});
    }
  }
  std::vector<std::size_t> sorted(row_ids.begin(), row_ids.end());
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "submatrix: duplicate row id");
  return {row_ids.size(), col_ids.size(), std::move(out)};
}

void SparseStructure::write_coo(std::ostream& out) const {
  for (const auto& e : entries_) out << e.row << '\t' << e.col << '\t' << e.value << '\n';
}

SparseStructure sparse_product(const SparseStructure& a, const SparseStructure& b) {
  require(a.cols() == b.rows(), "sparse_product: inner dimension mismatch");
  std::vector<Triplet> out;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<Index> touched;
  const auto& ae = a.entries();
  const auto& be = b.entries();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (auto k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const auto mid = ae[k].col;
      for (auto q = b.row_ptr()[mid]; q < b.row_ptr()[mid + 1]; ++q) {
        if (acc[be[q].col] == 0.0) touched.push_back(be[q].col);
        acc[be[q].col] += static_cast<double>(ae[k].value) * be[q].value;
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (auto c : touched) {
      if (acc[c] != 0.0) out.push_back({static_cast<Index>(r), c, static_cast<float>(acc[c])});
      acc[c] = 0.0;
    }
    touched.clear();
  }
  return {a.rows(), b.cols(), std::move(out)};
}

SparseStructure sparse_sum(const SparseStructure& a, const SparseStructure& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sparse_sum: shape mismatch");
  std::vector<Triplet> out;
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t i = 0, j = 0;
  auto less = [](const Triplet& p, const Triplet& q) {
    return p.row != q.row ? p.row < q.row : p.col < q.col;
  };
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && less(x[i], y[j]))) {
      out.push_back(x[i++]);
    } else if (i == x.size() || less(y[j], x[i])) {
      out.push_back(y[j++]);
    } else {
      out.push_back({x[i].row, x[i].col, x[i].value + y[j].value});
      ++i, ++j;
    }
  }
  return {a.rows(), a.cols(), std::move(out)};
}

// ---------------------------------------------------------------------------

SimplicialComplex2 build_clique_complex(const Graph& g) {
  SimplicialComplex2 c;
  c.n_vertices = g.n_vertices;
  c.edges = g.edges;

  // Forward neighbor lists (neighbors with larger index), ascending because
  // the edge list is sorted.
  std::vector<std::vector<Index>> up(g.n_vertices);
  for (const auto& e : g.edges) up[e[0]].push_back(e[1]);

  for (const auto& e : g.edges) {
    const auto& nu = up[e[0]];
    const auto& nv = up[e[1]];
    // w > v with w adjacent to both u and v.
    auto iu = std::upper_bound(nu.begin(), nu.end(), e[1]);
    auto iv = nv.begin();
    while (iu != nu.end() && iv != nv.end()) {
      if (*iu < *iv) {
        ++iu;
      } else if (*iv < *iu) {
        ++iv;
      } else {
        c.triangles.push_back({e[0], e[1], *iu});
        ++iu, ++iv;
      }
    }
  }
  return c;
}

SparseStructure adjacency_0(const SimplicialComplex2& c) {
  std::vector<Triplet> t;
  t.reserve(2 * c.edges.size());
  for (const auto& e : c.edges) {
    t.push_back({e[0], e[1], 1.0f});
    t.push_back({e[1], e[0], 1.0f});
  }
  return {c.n_vertices, c.n_vertices, std::move(t)};
}

SparseStructure boundary_1(const SimplicialComplex2& c) {
  std::vector<Triplet> t;
  t.reserve(2 * c.edges.size());
  for (std::size_t j = 0; j < c.edges.size(); ++j) {
    const auto col = static_cast<Index>(j);
    t.push_back({c.edges[j][0], col, -1.0f});
    t.push_back({c.edges[j][1], col, 1.0f});
  }
  return {c.n_vertices, c.edges.size(), std::move(t)};
}

SparseStructure boundary_2(const SimplicialComplex2& c) {
  std::vector<Triplet> t;
  t.reserve(3 * c.triangles.size());
  for (std::size_t j = 0; j < c.triangles.size(); ++j) {
    const auto [u, v, w] = c.triangles[j];
    const auto col = static_cast<Index>(j);
    const auto uv = c.edge_index(u, v);
    const auto uw = c.edge_index(u, w);
    const auto vw = c.edge_index(v, w);
    require(uv && uw && vw, "boundary_2: triangle face missing from edge list");
    // d[u,v,w] = [v,w] - [u,w] + [u,v]
    t.push_back({static_cast<Index>(*vw), col, 1.0f});
    t.push_back({static_cast<Index>(*uw), col, -1.0f});
    t.push_back({static_cast<Index>(*uv), col, 1.0f});
  }
  return {c.edges.size(), c.triangles.size(), std::move(t)};
}

SparseStructure incidence_0_2(const SimplicialComplex2& c) {
  std::vector<Triplet> t;
  t.reserve(3 * c.triangles.size());
  for (std::size_t j = 0; j < c.triangles.size(); ++j) {
    for (auto v : c.triangles[j]) t.push_back({v, static_cast<Index>(j), 1.0f});
  }
  return {c.n_vertices, c.triangles.size(), std::move(t)};
}

SparseStructure hodge_laplacian(const SimplicialComplex2& c, int k) {
  require(k >= 0 && k <= 2, "hodge_laplacian: k must be 0, 1 or 2");
  if (k == 0) {
    const auto b1 = boundary_1(c);
    return sparse_product(b1, b1.transpose());
  }
  if (k == 1) {
    const auto b1 = boundary_1(c);
    const auto b2 = boundary_2(c);
    return sparse_sum(sparse_product(b1.transpose(), b1), sparse_product(b2, b2.transpose()));
  }
  const auto b2 = boundary_2(c);
  return sparse_product(b2.transpose(), b2);
}

}  // namespace topomlp
