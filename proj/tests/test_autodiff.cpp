#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "topomlp/activation.hpp"
#include "topomlp/autodiff.hpp"

using namespace topomlp;
using namespace topomlp::ad;
using gradcheck::random;
using gradcheck::step;

namespace {

template <class T>
double tolerance() { return std::is_same_v<T, float> ? 1e-3 : 1e-6; }

template <class T>
double long_double_ce(const Matrix<double>& logits, const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  long double total = 0;
  for (auto r : rows) {
    long double z = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(static_cast<long double>(logits(r, c)));
    total += std::log(z) - logits(r, static_cast<std::size_t>(labels[r]));
  }
  return static_cast<double>(total / rows.size());
}

}  // namespace

TEST_CASE_TEMPLATE("matmul", T, float, double) {
  Tape<T> tape;
  auto a = tape.constant(Matrix<T>(2, 2, std::vector<T>{1, 2, 3, 4}));
  auto b = tape.constant(Matrix<T>(2, 1, std::vector<T>{5, 6}));
  CHECK(matmul(a, b).value() == Matrix<T>(2, 1, std::vector<T>{17, 39}));
  auto eye = tape.constant(Matrix<T>(2, 2, std::vector<T>{1, 0, 0, 1}));
  CHECK(matmul(eye, a).value() == a.value());
  CHECK_THROWS_AS(matmul(b, b), Error);

  auto r = gradcheck::check<T>({random<T>(5, 4, 1), random<T>(4, 3, 2)},
                               [](Tape<T>&, const auto& v) { return matmul(v[0], v[1]); }, step<T>());
  CHECK(r.max_error < tolerance<T>());
  r = gradcheck::check<T>({random<T>(5, 4, 3), random<T>(6, 4, 4)},
                          [](Tape<T>&, const auto& v) { return matmul_nt(v[0], v[1]); }, step<T>());
  CHECK(r.max_error < tolerance<T>());
}

TEST_CASE_TEMPLATE("spmm", T, float, double) {
  Tape<T> tape;
  const SparseStructure zero(3, 3, {});
  auto x = tape.constant(random<T>(3, 2, 5));
  CHECK(spmm(zero, x).value() == Matrix<T>(3, 2));

  const SparseStructure a0(3, 3, {{0, 1, 1}, {0, 2, 1}, {1, 0, 1}, {1, 2, 1}, {2, 0, 1}, {2, 1, 1}});
  auto eye = tape.constant(Matrix<T>(3, 3, std::vector<T>{1, 0, 0, 0, 1, 0, 0, 0, 1}));
  CHECK(spmm(a0, eye).value() == Matrix<T>(3, 3, std::vector<T>{0, 1, 1, 1, 0, 1, 1, 1, 0}));

  Rng rng(6);
  std::vector<Triplet> t;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 5; ++j)
      if (rng.uniform() < 0.4) t.push_back({i, j, static_cast<float>(rng.uniform(-1, 1))});
  const SparseStructure s(6, 5, t);
  const auto xv = random<double>(5, 3, 7);
  auto y = spmm(s, tape.constant(matrix_cast<T>(xv))).value();
  CHECK(oracle::max_relative_error(y, oracle::dense_product(s.to_dense<double>(), xv), 1.0) < 1e-6);
  CHECK_THROWS_AS(spmm(s, x), Error);

  auto r = gradcheck::check<T>({random<T>(5, 3, 8)}, [&s](Tape<T>&, const auto& v) { return spmm(s, v[0]); }, step<T>());
  CHECK(r.max_error < tolerance<T>());
}

TEST_CASE_TEMPLATE("elementwise and reductions", T, float, double) {
  Tape<T> tape;
  auto w = tape.parameter(Matrix<T>(2, 2, std::vector<T>{1, -2, 3, 0.5}));
  auto s = sum(w);
  CHECK(s.value()(0, 0) == T(2.5));
  tape.backward(s);
  CHECK(w.grad() == Matrix<T>(2, 2, T(1)));

  Tape<T> tape2;
  auto w2 = tape2.parameter(Matrix<T>(2, 2, std::vector<T>{1, -2, 3, 0.5}));
  tape2.backward(sum_squares(w2));
  CHECK(w2.grad() == Matrix<T>(2, 2, std::vector<T>{2, -4, 6, 1}));

  for (auto f : std::vector<gradcheck::Builder<T>>{
           [](Tape<T>&, const auto& v) { return add(v[0], v[1]); },
           [](Tape<T>&, const auto& v) { return scale(v[0], T(-2.5)); },
           [](Tape<T>&, const auto& v) { return sum(v[1]); },
           [](Tape<T>&, const auto& v) { return sum_squares(add(v[0], v[1])); },
       }) {
    const auto r = gradcheck::check<T>({random<T>(3, 4, 9), random<T>(3, 4, 10)}, f, step<T>());
    CHECK(r.max_error < tolerance<T>());
  }
  CHECK_THROWS_AS(add(w, tape.constant(Matrix<T>(1, 2))), Error);
}

TEST_CASE_TEMPLATE("gelu", T, float, double) {
  CHECK(gelu_value<T>(0) == T(0));
  CHECK(std::fabs(gelu_value<T>(10) - T(10)) < 1e-4);
  // Independent closed form of the tanh approximation.
  for (double x : {-3.0, -1.0, 0.2, 2.5}) {
    const double ref = 0.5 * x * (1 + std::tanh(std::sqrt(2 / M_PI) * (x + 0.044715 * x * x * x)));
    CHECK(gelu_value<T>(static_cast<T>(x)) == doctest::Approx(ref).epsilon(1e-6));
  }
  const Matrix<T> points(1, 4, std::vector<T>{-2, -0.5, 0.3, 1.7});
  const auto r = gradcheck::check<T>({points}, [](Tape<T>&, const auto& v) { return gelu(v[0]); }, step<T>());
  CHECK(r.max_error < tolerance<T>());
}

TEST_CASE_TEMPLATE("gelu kernel matches the scalar form at every length", T, float, double) {
  const double tol = std::is_same_v<T, float> ? 1e-6 : 1e-13;
  for (std::size_t n : {1, 7, 16, 17, 40}) {
    const auto x = random<T>(1, n, 30 + n, 4.0);
    std::vector<T> y(n), g(n, T(1)), dy(n);
    gelu_forward(x.data(), y.data(), n);
    gelu_backward(x.data(), g.data(), dy.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x.data()[i];
      CHECK(std::fabs(y[i] - gelu_value<double>(v)) <= tol * std::max(1.0, std::fabs(v)));
      const double h = 1e-6;
      const double fd = (gelu_value<double>(v + h) - gelu_value<double>(v - h)) / (2 * h);
      CHECK(std::fabs(dy[i] - fd) < (std::is_same_v<T, float> ? 1e-5 : 1e-8));
    }
    // A value's result does not depend on where it sits in the array.
    if (n > 1) {
      T tail_only;
      gelu_forward(x.data() + n - 1, &tail_only, 1);
      CHECK(tail_only == y[n - 1]);
    }
  }
}

TEST_CASE_TEMPLATE("dropout", T, float, double) {
  Rng rng(12);
  Tape<T> tape;
  auto x = tape.constant(random<T>(4, 5, 13));
  CHECK(dropout(x, 0.0, true, rng).value() == x.value());
  CHECK(dropout(x, 0.0, false, rng).value() == x.value());
  CHECK(dropout(x, 0.6, false, rng).value() == x.value());
  CHECK_THROWS_AS(dropout(x, 1.0, true, rng), Error);
  CHECK_THROWS_AS(dropout(x, -0.1, true, rng), Error);

  Rng r1(99), r2(99);
  CHECK(dropout(x, 0.5, true, r1).value() == dropout(x, 0.5, true, r2).value());

  auto r = gradcheck::check<T>({random<T>(4, 6, 14)},
                               [](Tape<T>&, const auto& v) {
                                 Rng local(3);
                                 return dropout(v[0], 0.4, true, local);
                               },
                               step<T>());
  CHECK(r.max_error < tolerance<T>());
}

TEST_CASE("dropout statistics") {
  Rng rng(2024);
  Tape<float> tape;
  auto ones = tape.constant(Matrix<float>(1000, 1000, 1.0f));
  const auto out = dropout(ones, 0.6, true, rng).value();
  double total = 0;
  std::size_t zeros = 0;
  for (float v : out.values()) {
    total += v;
    zeros += v == 0.0f;
    CHECK((v == 0.0f || std::fabs(v - 2.5f) < 1e-6f));
  }
  CHECK(std::fabs(total / out.size() - 1.0) < 0.01);
  CHECK(std::fabs(static_cast<double>(zeros) / out.size() - 0.6) < 0.01);
}

TEST_CASE_TEMPLATE("row normalization", T, float, double) {
  Tape<T> tape;
  auto x = tape.constant(Matrix<T>(2, 2, std::vector<T>{3, 4, 0, 0}));
  const auto y = row_l2_normalize(x).value();
  CHECK(y(0, 0) == doctest::Approx(0.6));
  CHECK(y(0, 1) == doctest::Approx(0.8));
  CHECK(y(1, 0) == T(0));
  CHECK(y(1, 1) == T(0));
  auto r = gradcheck::check<T>({random<T>(4, 3, 15)}, [](Tape<T>&, const auto& v) { return row_l2_normalize(v[0]); },
                               step<T>());
  CHECK(r.max_error < tolerance<T>());
}

TEST_CASE_TEMPLATE("cross entropy", T, float, double) {
  const std::vector<int> labels{0, 3, 6, 2};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  {
    Tape<T> tape;
    auto ce = cross_entropy(tape.constant(Matrix<T>(4, 7, T(0.3))), labels, rows);
    CHECK(ce.value()(0, 0) == doctest::Approx(std::log(7.0)).epsilon(1e-6));
  }
  {
    Tape<T> tape;
    Matrix<T> logits(1, 3);
    logits(0, 1) = 1000;
    const std::vector<int> l{1};
    const std::vector<std::size_t> r{0};
    const auto v = cross_entropy(tape.constant(logits), l, r).value()(0, 0);
    CHECK(v >= 0);
    CHECK(v < 1e-6);
  }
  {
    Tape<T> tape;
    const auto logits = random<double>(5, 3, 16, 3.0);
    const std::vector<int> l{2, 0, 1, 1, 0};
    const std::vector<std::size_t> r{0, 2, 3};
    const auto v = cross_entropy(tape.constant(matrix_cast<T>(logits)), l, r).value()(0, 0);
    CHECK(std::fabs(v - long_double_ce<T>(logits, l, r)) < 1e-5);
    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(cross_entropy(tape.constant(matrix_cast<T>(logits)), l, none), Error);
    const std::vector<int> bad{5, 0, 1, 1, 0};
    CHECK_THROWS_AS(cross_entropy(tape.constant(matrix_cast<T>(logits)), bad, r), Error);

    const auto res = gradcheck::check<T>(
        {matrix_cast<T>(logits)}, [&](Tape<T>&, const auto& v) { return cross_entropy(v[0], l, r); }, step<T>());
    CHECK(res.max_error < tolerance<T>());
  }
}

TEST_CASE("tape contract") {
  Tape<double> tape;
  auto w = tape.parameter(Matrix<double>(2, 2, 1.0));
  auto loss = sum(w);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), Error);

  Tape<double> t2;
  auto m = t2.parameter(Matrix<double>(2, 2, 1.0));
  CHECK_THROWS_AS(t2.backward(m), Error);

  Tape<float> t3;
  auto big = t3.parameter(Matrix<float>(1, 1, 1e30f));
  CHECK_THROWS_AS(sum_squares(big), Error);
  CHECK_THROWS_AS(t3.constant(Matrix<float>(1, 1, std::nanf(""))), Error);

  // Inputs across the documented range stay finite.
  Tape<float> t4;
  Matrix<float> wide(1, 5, std::vector<float>{-1e4f, -3, 0, 7, 1e4f});
  auto x = t4.constant(wide);
  CHECK_NOTHROW(gelu(x));
  CHECK_NOTHROW(row_l2_normalize(x));
  const std::vector<int> l{0};
  const std::vector<std::size_t> r{0};
  CHECK(cross_entropy(x, l, r).value()(0, 0) == doctest::Approx(2e4));
}

TEST_CASE("adam") {
  AdamConfig cfg;
  cfg.weight_decay = 0;
  {
    Adam<double> opt(cfg);
    Matrix<double> w(2, 2, std::vector<double>{1, 2, 3, 4});
    const auto before = w;
    Matrix<double> g(2, 2);
    std::vector<Matrix<double>*> p{&w};
    std::vector<const Matrix<double>*> gs{&g};
    opt.step(p, gs);
    CHECK(w == before);
    CHECK(opt.steps() == 1);
  }
  {
    Adam<double> opt(cfg);
    Matrix<double> w(1, 1, 0.5), g(1, 1, 1.0);
    std::vector<Matrix<double>*> p{&w};
    std::vector<const Matrix<double>*> gs{&g};
    opt.step(p, gs);
    CHECK(w(0, 0) == doctest::Approx(0.49).epsilon(1e-6));
  }
  {
    // f(w) = w^2 from w = 1, against a scalar transcription of the update.
    cfg.lr = 0.05;
    Adam<double> opt(cfg);
    Matrix<double> w(1, 1, 1.0);
    double ref = 1, m = 0, v = 0;
    for (int t = 1; t <= 100; ++t) {
      Matrix<double> g(1, 1, 2 * w(0, 0));
      std::vector<Matrix<double>*> p{&w};
      std::vector<const Matrix<double>*> gs{&g};
      opt.step(p, gs);
      const double gr = 2 * ref;
      m = 0.9 * m + 0.1 * gr;
      v = 0.999 * v + 0.001 * gr * gr;
      ref -= 0.05 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(std::fabs(w(0, 0)) < 0.05);
    CHECK(w(0, 0) == doctest::Approx(ref).epsilon(1e-9));
  }
  {
    AdamConfig wd;
    wd.weight_decay = 0.1;
    Adam<double> opt(wd);
    Matrix<double> w(1, 1, 2.0), g;
    std::vector<Matrix<double>*> p{&w};
    std::vector<const Matrix<double>*> gs{&g};
    opt.step(p, gs);
    CHECK(w(0, 0) == doctest::Approx(1.99));
    Matrix<double> bad(2, 1);
    std::vector<const Matrix<double>*> bs{&bad};
    CHECK_THROWS_AS(opt.step(p, bs), Error);
  }
}
