#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topomlp/config.hpp"

// Command implementations behind the `topomlp` executable.
namespace topomlp::cli {

/// A bundle path as given, else `$TOPOMLP_DATA_ROOT/<name>`, else `data/<name>`.
std::filesystem::path resolve_data(const std::string& data);

struct ComplexSummary {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t triangles = 0;
};

std::string describe(const ComplexSummary& s);

/// Writes `summary.txt` and coordinate-list exports of A0, B1, B2, B02, L0,
/// L1, L2 into `out_dir`.
ComplexSummary build_complex(const std::filesystem::path& bundle_dir, const std::filesystem::path& out_dir);

struct TrainOutcome {
  std::filesystem::path run_dir;
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
};

/// Trains per `cfg` and writes config, history.csv, best.ckpt, metrics.json.
TrainOutcome train(const RunConfig& cfg);

/// Accuracy of a finished run's best checkpoint on `split`.
double evaluate(const std::filesystem::path& run_dir, Split split);

struct BenchRow {
  std::string dataset;
  TimingStats topo;
  TimingStats base;
  InferenceStats topo_ops;
  InferenceStats base_ops;
  double ratio() const { return topo.mean_s / base.mean_s; }
};

struct BenchOptions {
  std::vector<std::filesystem::path> bundles;
  std::filesystem::path topo_run;  // optional trained weights
  std::filesystem::path base_run;
  std::size_t runs = 20;
  std::size_t warmup = 3;
  std::size_t hidden = 256;
  Combiner combiner = Combiner::kMean;
};

std::vector<BenchRow> bench(const BenchOptions& opts);
std::string render_bench_table(const std::vector<BenchRow>& rows);
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

/// Runs the sweep and writes noise_sweep.csv/.dat into the run directory.
std::vector<NoiseCell> noise_sweep(const RunConfig& cfg, std::filesystem::path* run_dir_out = nullptr);
std::string render_noise_table(const std::vector<NoiseCell>& cells);

/// Full CLI: returns the process exit code.
int main(int argc, char** argv);

}  // namespace topomlp::cli
