#pragma once

// Random bundles with the sizes of the three citation benchmarks, used for
// timing when the real bundles are not installed. Edges are grown partly by
// closing open triads so the clique complex has a realistic triangle count.

#include <set>
#include <string>

#include "topomlp/bundle.hpp"
#include "topomlp/rng.hpp"

namespace standin {

struct Shape {
  std::string name;
  std::size_t n, d, classes, edges;
  double feature_density;  // fraction of nonzero bag-of-words entries
  double closure;          // probability that a new edge closes a triad
};

inline const std::vector<Shape>& shapes() {
  static const std::vector<Shape> s{
      {"cora", 2708, 1433, 7, 5278, 0.0127, 0.55},
      {"citeseer", 3327, 3703, 6, 4552, 0.0086, 0.55},
      {"pubmed", 19717, 500, 3, 44324, 0.100, 0.55},
  };
  return s;
}

inline topomlp::GraphBundle make(const Shape& shape, std::uint64_t seed) {
  using namespace topomlp;
  Rng rng(seed);
  std::set<Edge> edges;
  std::vector<std::vector<Index>> adj(shape.n);
  auto add = [&](Index u, Index v) {
    if (u == v) return;
    const Edge e{std::min(u, v), std::max(u, v)};
    if (!edges.insert(e).second) return;
    adj[u].push_back(v);
    adj[v].push_back(u);
  };
  while (edges.size() < shape.edges) {
    const auto u = static_cast<Index>(rng.below(shape.n));
    if (!adj[u].empty() && rng.uniform() < shape.closure) {
      const auto v = adj[u][rng.below(adj[u].size())];
      if (!adj[v].empty()) add(u, adj[v][rng.below(adj[v].size())]);
    } else {
      add(u, static_cast<Index>(rng.below(shape.n)));
    }
  }
  GraphBundle b;
  b.n = shape.n;
  b.d = shape.d;
  b.classes = shape.classes;
  b.graph = Graph::make(shape.n, {edges.begin(), edges.end()});
  b.features = Matrix<float>(shape.n, shape.d);
  for (auto& v : b.features.values()) v = rng.uniform() < shape.feature_density ? 1.0f : 0.0f;
  b.labels.resize(shape.n);
  b.splits.assign(shape.n, Split::kNone);
  for (std::size_t i = 0; i < shape.n; ++i) {
    b.labels[i] = static_cast<int>(rng.below(shape.classes));
    b.splits[i] = i < 20 * shape.classes ? Split::kTrain : i >= shape.n - 1000 ? Split::kTest : Split::kNone;
  }
  return b;
}

}  // namespace standin
