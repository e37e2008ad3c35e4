#pragma once

#include <string>
#include <string_view>

#include "topomlp/complex.hpp"
#include "topomlp/matrix.hpp"

namespace topomlp {

/// Feature matrix on the simplices of one dimension.
struct Cochain {
  int level = 0;
  Matrix<float> data;
};

enum class Combiner { kMax, kMin, kMean, kProd };

Combiner parse_combiner(std::string_view name);
std::string to_string(Combiner h);

Cochain lift_edge_features(const Cochain& x0, const SimplicialComplex2& c, Combiner h);
Cochain lift_face_features(const Cochain& x0, const SimplicialComplex2& c, Combiner h);

/// Scale each row to unit L1 norm; all-zero rows stay zero.
void row_l1_normalize(Matrix<float>& x);

/// Node, edge and face cochains for one complex.
struct CochainSet {
  Cochain x0;
  Cochain x1;
  Cochain x2;
};

/// Normalizes node features, then lifts them to edges and faces with `h`.
CochainSet make_cochains(Matrix<float> node_features, const SimplicialComplex2& c, Combiner h);

}  // namespace topomlp
