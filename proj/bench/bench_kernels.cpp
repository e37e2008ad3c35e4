// Naive reference kernels vs. the blocked OpenMP kernels on training-sized shapes.
//
//   ./bench_kernels [repeats]
//
// Set OMP_NUM_THREADS (or TOPOMLP_THREADS for the CLI) to pin the thread count.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "topomlp/complex.hpp"
#include "topomlp/kernels.hpp"
#include "topomlp/rng.hpp"

using namespace topomlp;

namespace {

Matrix<float> random_matrix(std::size_t r, std::size_t c, Rng& rng, double density = 1.0) {
  Matrix<float> m(r, c);
  for (auto& v : m.values()) v = rng.uniform() < density ? static_cast<float>(rng.uniform(-1, 1)) : 0.0f;
  return m;
}

double seconds(const std::function<void()>& f, int repeats) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void report(const char* name, double reference, double blocked, double flops) {
  std::printf("%-34s reference %8.2f ms  blocked %8.2f ms  speedup %5.2fx  (%6.2f GFLOP/s)\n", name, reference * 1e3,
              blocked * 1e3, reference / blocked, flops / blocked * 1e-9);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  if (argc > 2 || repeats <= 0) {
    std::fprintf(stderr, "usage: %s [repeats > 0]\n", argv[0]);
    return 2;
  }
  std::printf("threads=%d repeats=%d\n", omp_get_max_threads(), repeats);
  Rng rng(7);

  {
    // Cora-sized first layer on sparse bag-of-words rows.
    const auto x = random_matrix(2000, 1433, rng, 0.013);
    const auto w = random_matrix(1433, 256, rng);
    report("gemm_nn 2000x1433 (1.3% dense) x256", seconds([&] { (void)kernels::reference::gemm_nn(x, w); }, repeats),
           seconds([&] { (void)kernels::parallel::gemm_nn(x, w); }, repeats), 2.0 * 2000 * 1433 * 256);
  }
  {
    const auto h = random_matrix(2000, 256, rng);
    const auto w = random_matrix(256, 256, rng);
    report("gemm_nn 2000x256 x256", seconds([&] { (void)kernels::reference::gemm_nn(h, w); }, repeats),
           seconds([&] { (void)kernels::parallel::gemm_nn(h, w); }, repeats), 2.0 * 2000 * 256 * 256);
  }
  {
    // Similarity matrix between two embedding batches.
    const auto a = random_matrix(2000, 256, rng);
    const auto b = random_matrix(2000, 256, rng);
    report("gemm_nt 2000x256 . 2000x256^T", seconds([&] { (void)kernels::reference::gemm_nt(a, b); }, repeats),
           seconds([&] { (void)kernels::parallel::gemm_nt(a, b); }, repeats), 2.0 * 2000 * 2000 * 256);
  }
  {
    const auto a = random_matrix(2000, 1433, rng, 0.013);
    const auto g = random_matrix(2000, 256, rng);
    report("gemm_tn 2000x1433^T . 2000x256", seconds([&] { (void)kernels::reference::gemm_tn(a, g); }, repeats),
           seconds([&] { (void)kernels::parallel::gemm_tn(a, g); }, repeats), 2.0 * 2000 * 1433 * 256);
  }
  {
    std::vector<Edge> edges;
    for (int i = 0; i < 5278; ++i) {
      auto u = static_cast<Index>(rng.below(2708));
      auto v = static_cast<Index>(rng.below(2708));
      if (u != v) edges.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const auto c = build_clique_complex(Graph::make(2708, edges));
    const auto a0 = adjacency_0(c);
    const auto x = random_matrix(2708, 256, rng);
    report("spmm A0(2708, ~10.5k nnz) x256", seconds([&] { (void)kernels::reference::spmm(a0, x); }, repeats),
           seconds([&] { (void)kernels::parallel::spmm(a0, x); }, repeats), 2.0 * a0.nnz() * 256);
  }
  return 0;
}
