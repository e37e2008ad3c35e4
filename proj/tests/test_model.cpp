#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gradcheck.hpp"
#include "topomlp/checkpoint.hpp"
#include "topomlp/kernels.hpp"
#include "topomlp/model.hpp"

using namespace topomlp;
namespace fs = std::filesystem;

namespace {

double gelu_ref(double x) { return 0.5 * x * (1 + std::tanh(std::sqrt(2 / M_PI) * (x + 0.044715 * x * x * x))); }

Matrix<double> dense_gelu(Matrix<double> m) {
  for (auto& v : m.values()) v = gelu_ref(v);
  return m;
}

Matrix<double> dense_add(Matrix<double> a, const Matrix<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
  return a;
}

Matrix<float> random_features(std::size_t r, std::size_t c, std::uint64_t seed) {
  return gradcheck::random<float>(r, c, seed);
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("topomlp_test_model_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("topo forward shapes and zero weights") {
  const ModelDims dims{3, 4, 5, 8, 2};
  auto p = init_topo_params(dims, 1);
  ad::Tape<float> tape;
  Rng rng(1);
  const std::array<ad::Var<float>, 3> x{tape.constant(random_features(6, 3, 1)), tape.constant(random_features(7, 4, 2)),
                                        tape.constant(random_features(2, 5, 3))};
  auto out = topo_forward(x, bind_parameters(tape, p), 0.6, true, rng);
  CHECK(out.z[0].rows() == 6);
  CHECK(out.z[0].cols() == 8);
  CHECK(out.z[1].rows() == 7);
  CHECK(out.z[1].cols() == 8);
  CHECK(out.z[2].rows() == 2);
  CHECK(out.y0.rows() == 6);
  CHECK(out.y0.cols() == 2);

  for (auto* m : p.all()) m->fill(0.0f);
  out = topo_forward(x, bind_parameters(tape, p), 0.6, true, rng);
  for (int k = 0; k < 3; ++k)
    for (float v : out.z[k].value().values()) CHECK(v == 0.0f);
  for (float v : out.y0.value().values()) CHECK(v == 0.0f);

  const std::array<ad::Var<float>, 3> wrong{x[1], x[1], x[2]};
  CHECK_THROWS_AS(topo_forward(wrong, bind_parameters(tape, p), 0.0, false, rng), Error);
}

TEST_CASE("eval forward matches a dense pipeline") {
  const ModelDims dims{3, 3, 3, 5, 2};
  const auto p = params_cast<double>(init_topo_params(dims, 4));
  const auto x0 = gradcheck::random<double>(4, 3, 5);
  ad::Tape<double> tape;
  Rng rng(0);
  const std::array<ad::Var<double>, 3> x{tape.constant(x0), tape.constant(x0), tape.constant(x0)};
  const auto out = topo_forward(x, bind_parameters(tape, p), 0.6, false, rng);
  for (int k = 0; k < 3; ++k) {
    const auto z = oracle::dense_product(dense_gelu(oracle::dense_product(x0, p.input[k])), p.embed[k]);
    CHECK(oracle::max_relative_error(out.z[k].value(), z, 1.0) < 1e-6);
  }
  const auto y = oracle::dense_product(out.z[0].value(), p.head);
  CHECK(oracle::max_relative_error(out.y0.value(), y, 1.0) < 1e-6);

  const auto fp = init_topo_params(dims, 4);
  const auto logits = topo_node_logits(matrix_cast<float>(x0), fp);
  CHECK(oracle::max_relative_error(logits, out.y0.value(), 1.0) < 1e-5);
  CHECK(topo_node_logits(matrix_cast<float>(x0), fp) == logits);
}

TEST_CASE("hand-set toy inference") {
  TopoMLPParams p;
  const Matrix<float> eye(2, 2, std::vector<float>{1, 0, 0, 1});
  for (int k = 0; k < 3; ++k) {
    p.input[k] = eye;
    p.embed[k] = eye;
  }
  p.head = eye;
  const Matrix<float> x0(4, 2, std::vector<float>{2, 0, 0, 2, 1, 3, -1, -2});
  // gelu(-1) = -0.159 < gelu(-2) = -0.045, so the last row picks class 1.
  CHECK(topo_infer_nodes(x0, p) == std::vector<int>{0, 1, 1, 1});
}

TEST_CASE("multiply counts") {
  const ModelDims dims{6, 6, 6, 16, 3};
  const auto tp = init_topo_params(dims, 2);
  const auto bp = init_base_params(dims, 2);
  const auto c = build_clique_complex(Graph::make(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}));
  const CochainSet x{{0, random_features(4, 6, 1)}, {1, random_features(4, 6, 2)}, {2, random_features(1, 6, 3)}};
  const auto s = StructureSet::from(c);

  InferenceStats topo, base;
  kernels::reset_multiply_count();
  topo_infer_nodes(x.x0.data, tp, &topo);
  CHECK(topo.hidden_multiplies == 2);
  CHECK(topo.head_multiplies == 1);
  base_logits(x, s, bp, &base);
  CHECK(base.hidden_multiplies == 6);
  CHECK(base.head_multiplies == 1);
  CHECK(kernels::multiply_count() == 10);
}

TEST_CASE("base model matches a dense oracle") {
  const auto c = build_clique_complex(Graph::make(3, {{0, 1}, {0, 2}, {1, 2}}));
  const auto s = StructureSet::from(c);
  const ModelDims dims{4, 4, 4, 6, 3};
  const auto p = init_base_params(dims, 8);
  const CochainSet x{{0, random_features(3, 4, 4)}, {1, random_features(3, 4, 5)}, {2, random_features(1, 4, 6)}};

  const auto pd = [&](int k) { return matrix_cast<double>(p.branch[k]); };
  const auto xd = [&](const Cochain& ch) { return matrix_cast<double>(ch.data); };
  auto h = oracle::dense_product(s.a0.to_dense<double>(), oracle::dense_product(xd(x.x0), pd(0)));
  h = dense_add(h, oracle::dense_product(s.b1.to_dense<double>(), oracle::dense_product(xd(x.x1), pd(1))));
  h = dense_add(h, oracle::dense_product(s.b02.to_dense<double>(), oracle::dense_product(xd(x.x2), pd(2))));
  const auto expected = oracle::dense_product(dense_gelu(h), matrix_cast<double>(p.head));

  CHECK(oracle::max_relative_error(base_logits(x, s, p), expected, 1.0) < 1e-5);

  ad::Tape<float> tape;
  Rng rng(0);
  const std::array<ad::Var<float>, 3> xv{tape.constant(x.x0.data), tape.constant(x.x1.data), tape.constant(x.x2.data)};
  const auto y = base_forward(xv, s, bind_parameters(tape, p), 0.6, false, rng);
  CHECK(oracle::max_relative_error(y.value(), expected, 1.0) < 1e-5);

  // Zero structure leaves head(gelu(0)) = 0; zero B1 and B02 leave the graph term only.
  const StructureSet zero{SparseStructure(3, 3, {}), SparseStructure(3, 3, {}), SparseStructure(3, 1, {})};
  const auto zero_logits = base_logits(x, zero, p);
  for (float v : zero_logits.values()) CHECK(v == 0.0f);
  const StructureSet graph_only{s.a0, SparseStructure(3, 3, {}), SparseStructure(3, 1, {})};
  const auto only = oracle::dense_product(
      dense_gelu(oracle::dense_product(s.a0.to_dense<double>(), oracle::dense_product(xd(x.x0), pd(0)))),
      matrix_cast<double>(p.head));
  CHECK(oracle::max_relative_error(base_logits(x, graph_only, p), only, 1.0) < 1e-5);
}

TEST_CASE("glorot initialization") {
  const ModelDims dims{10, 12, 14, 32, 4};
  const auto a = init_topo_params(dims, 3);
  const auto b = init_topo_params(dims, 3);
  CHECK(to_tensors(a) == to_tensors(b));
  CHECK_FALSE(to_tensors(a) == to_tensors(init_topo_params(dims, 4)));
  const auto limit = std::sqrt(6.0 / (10 + 32));
  for (float v : a.input[0].values()) CHECK(std::fabs(v) <= limit);
  CHECK(a.input[1].rows() == 12);
  CHECK(a.embed[2].rows() == 32);
  CHECK(a.head.cols() == 4);

  Rng rng(5);
  const auto w = glorot_uniform(300, 334, rng);
  const double lim = std::sqrt(6.0 / 634);
  double sq = 0, mean = 0;
  for (float v : w.values()) mean += v;
  mean /= w.size();
  for (float v : w.values()) sq += (v - mean) * (v - mean);
  const double variance = sq / (w.size() - 1);
  CHECK(std::fabs(variance - lim * lim / 3) < 0.05 * lim * lim / 3);

  CHECK_THROWS_AS(init_topo_params({0, 1, 1, 8, 2}, 1), Error);
  CHECK_THROWS_AS(init_base_params({1, 1, 1, 8, 0}, 1), Error);
  CHECK_THROWS_AS(glorot_uniform(0, 3, rng), Error);
}

TEST_CASE("checkpoint round trip and corruption") {
  const ModelDims dims{3, 3, 3, 4, 2};
  const auto dir = scratch("ckpt");
  fs::create_directories(dir);
  const auto tp = init_topo_params(dims, 1);
  save_checkpoint(dir / "topo.ckpt", to_tensors(tp));
  CHECK(to_tensors(topo_params_from(load_checkpoint(dir / "topo.ckpt"))) == to_tensors(tp));
  const auto bp = init_base_params(dims, 1);
  save_checkpoint(dir / "base.ckpt", to_tensors(bp));
  CHECK(to_tensors(base_params_from(load_checkpoint(dir / "base.ckpt"))) == to_tensors(bp));
  CHECK_THROWS_AS(topo_params_from(load_checkpoint(dir / "base.ckpt")), Error);

  // Header bytes against the documented layout.
  std::ifstream in(dir / "topo.ckpt", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "TMLP");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 7);
  CHECK(bytes[12] == 7);  // strlen("input.0")
  CHECK(std::string(bytes.begin() + 14, bytes.begin() + 21) == "input.0");

  auto write = [&](const std::vector<unsigned char>& b) {
    std::ofstream out(dir / "bad.ckpt", std::ios::binary);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  };
  auto bad = bytes;
  bad[0] = 'X';
  write(bad);
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
  write(std::vector<unsigned char>(bytes.begin(), bytes.end() - 3));
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
  bad = bytes;
  bad.push_back(0);
  write(bad);
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
  fs::remove_all(dir);
}
