#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "topomlp/cochain.hpp"

using namespace topomlp;

namespace {

Cochain nodes(std::size_t n, std::size_t d, std::vector<float> v) { return {0, Matrix<float>(n, d, std::move(v))}; }

const SimplicialComplex2& triangle() {
  static const auto c = build_clique_complex(Graph::make(3, {{0, 1}, {0, 2}, {1, 2}}));
  return c;
}

}  // namespace

TEST_CASE("combiner names") {
  for (auto h : {Combiner::kMax, Combiner::kMin, Combiner::kMean, Combiner::kProd})
    CHECK(parse_combiner(to_string(h)) == h);
  CHECK_THROWS_AS(parse_combiner("median"), Error);
}

TEST_CASE("edge lifting examples") {
  const auto c = build_clique_complex(Graph::make(2, {{0, 1}}));
  auto x1 = lift_edge_features(nodes(2, 2, {1, 3, 3, 5}), c, Combiner::kMean);
  CHECK(x1.level == 1);
  CHECK(x1.data == Matrix<float>(1, 2, std::vector<float>{2, 4}));

  x1 = lift_edge_features(nodes(2, 2, {1, -7, 1, -7}), c, Combiner::kMax);
  CHECK(x1.data == Matrix<float>(1, 2, std::vector<float>{1, -7}));

  x1 = lift_edge_features(nodes(2, 2, {2, -1, 3, 4}), c, Combiner::kProd);
  CHECK(x1.data == Matrix<float>(1, 2, std::vector<float>{6, -4}));

  CHECK_THROWS_AS(lift_edge_features(nodes(3, 1, {1, 2, 3}), c, Combiner::kMean), Error);
}

TEST_CASE("face lifting examples") {
  const auto& c = triangle();
  auto x2 = lift_face_features(nodes(3, 2, {0, 0, 3, 6, 6, 0}), c, Combiner::kMean);
  CHECK(x2.level == 2);
  CHECK(x2.data == Matrix<float>(1, 2, std::vector<float>{3, 2}));

  x2 = lift_face_features(nodes(3, 2, {1, 5, 2, 2, 3, 1}), c, Combiner::kMin);
  CHECK(x2.data == Matrix<float>(1, 2, std::vector<float>{1, 1}));

  const std::vector<float> same{1.5f, -2, 1.5f, -2, 1.5f, -2};
  for (auto h : {Combiner::kMean, Combiner::kMax, Combiner::kMin})
    CHECK(lift_face_features(nodes(3, 2, same), c, h).data == Matrix<float>(1, 2, std::vector<float>{1.5f, -2}));
  CHECK(lift_face_features(nodes(3, 2, same), c, Combiner::kProd).data ==
        Matrix<float>(1, 2, std::vector<float>{3.375f, -8}));

  CHECK_THROWS_AS(lift_face_features(nodes(2, 1, {1, 2}), c, Combiner::kMean), Error);
}

TEST_CASE("lifting is symmetric in vertex order and bounded") {
  Rng rng(11);
  const auto& c = triangle();
  const std::vector<std::vector<std::size_t>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int trial = 0; trial < 20; ++trial) {
    Matrix<float> x(3, 5);
    for (auto& v : x.values()) v = static_cast<float>(rng.uniform(-3, 3));
    for (auto h : {Combiner::kMax, Combiner::kMin, Combiner::kMean, Combiner::kProd}) {
      const auto base = lift_face_features({0, x}, c, h).data;
      CHECK(base.cols() == 5);
      for (const auto& p : perms) {
        const auto permuted = gather_rows(x, p);
        const auto lifted = lift_face_features({0, permuted}, c, h).data;
        for (std::size_t j = 0; j < 5; ++j) CHECK(lifted(0, j) == doctest::Approx(base(0, j)).epsilon(1e-6));
      }
      if (h == Combiner::kProd) continue;
      for (std::size_t j = 0; j < 5; ++j) {
        const float lo = std::min({x(0, j), x(1, j), x(2, j)});
        const float hi = std::max({x(0, j), x(1, j), x(2, j)});
        CHECK(base(0, j) >= lo - 1e-6f);
        CHECK(base(0, j) <= hi + 1e-6f);
      }
    }
  }
}

TEST_CASE("row normalization and cochain set") {
  Matrix<float> x(3, 2, std::vector<float>{1, 3, 0, 0, -2, 2});
  row_l1_normalize(x);
  CHECK(x == Matrix<float>(3, 2, std::vector<float>{0.25f, 0.75f, 0, 0, -0.5f, 0.5f}));

  const auto set = make_cochains(Matrix<float>(3, 2, std::vector<float>{2, 2, 4, 0, 0, 1}), triangle(), Combiner::kMean);
  CHECK(set.x0.data(0, 0) == 0.5f);
  CHECK(set.x1.data.rows() == 3);
  CHECK(set.x2.data.rows() == 1);
  CHECK(set.x2.data(0, 0) == doctest::Approx(0.5));
}
