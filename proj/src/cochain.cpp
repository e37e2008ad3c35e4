#include "topomlp/cochain.hpp"

#include <algorithm>
#include <cmath>

namespace topomlp {

Combiner parse_combiner(std::string_view name) {
  if (name == "max") return Combiner::kMax;
  if (name == "min") return Combiner::kMin;
  if (name == "mean") return Combiner::kMean;
  if (name == "prod") return Combiner::kProd;
  throw Error("unknown combiner '" + std::string(name) + "' (expected max|min|mean|prod)");
}

std::string to_string(Combiner h) {
  switch (h) {
    case Combiner::kMax: return "max";
    case Combiner::kMin: return "min";
    case Combiner::kMean: return "mean";
    case Combiner::kProd: return "prod";
  }
  return "?";
}

namespace {

template <std::size_t N>
Cochain lift(const Cochain& x0, const std::vector<std::array<Index, N>>& simplices,
             std::size_t n_vertices, Combiner h, int level) {
  require(x0.level == 0, "lift: input must be a 0-cochain");
  require(x0.data.rows() == n_vertices, "lift: node feature rows (" +
                                            std::to_string(x0.data.rows()) +
                                            ") != vertex count (" +
                                            std::to_string(n_vertices) + ")");
  const auto d = x0.data.cols();
  Matrix<float> out(simplices.size(), d);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < simplices.size(); ++j) {
    auto dst = out.row(j);
    const auto first = x0.data.row(simplices[j][0]);
    std::copy(first.begin(), first.end(), dst.begin());
    for (std::size_t m = 1; m < N; ++m) {
      const auto src = x0.data.row(simplices[j][m]);
      for (std::size_t c = 0; c < d; ++c) {
        switch (h) {
          case Combiner::kMax: dst[c] = std::max(dst[c], src[c]); break;
          case Combiner::kMin: dst[c] = std::min(dst[c], src[c]); break;
          case Combiner::kMean: dst[c] += src[c]; break;
          case Combiner::kProd: dst[c] *= src[c]; break;
        }
      }
    }
    if (h == Combiner::kMean) {
      for (auto& v : dst) v /= static_cast<float>(N);
    }
  }
  return {level, std::move(out)};
}

}  // namespace

Cochain lift_edge_features(const Cochain& x0, const SimplicialComplex2& c, Combiner h) {
  return lift(x0, c.edges, c.n_vertices, h, 1);
}

Cochain lift_face_features(const Cochain& x0, const SimplicialComplex2& c, Combiner h) {
  return lift(x0, c.triangles, c.n_vertices, h, 2);
}

void row_l1_normalize(Matrix<float>& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    double s = 0.0;
    for (auto v : row) s += std::fabs(v);
    if (s == 0.0) continue;
    const auto inv = static_cast<float>(1.0 / s);
    for (auto& v : row) v *= inv;
  }
}

CochainSet make_cochains(Matrix<float> node_features, const SimplicialComplex2& c, Combiner h) {
  row_l1_normalize(node_features);
  CochainSet set;
  set.x0 = {0, std::move(node_features)};
  set.x1 = lift_edge_features(set.x0, c, h);
  set.x2 = lift_face_features(set.x0, c, h);
  return set;
}

}  // namespace topomlp
