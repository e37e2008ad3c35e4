#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topomlp/trainer.hpp"

namespace topomlp {

enum class NoiseTarget { kTrain, kInference, kBoth };

NoiseTarget parse_noise_target(std::string_view name);
std::string to_string(NoiseTarget t);

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;
  NoiseTarget apply_to = NoiseTarget::kBoth;
};

/// Deletes k = floor(|E| * delta) uniformly chosen edges and adds k distinct
/// pairs drawn from the complement of the original edge set, so |E| is
/// unchanged. Non-edges come from rejection sampling over vertex pairs,
/// capped at 1000 * k draws.
Graph perturb_graph(const Graph& g, const NoiseSpec& spec);

struct NoiseCell {
  double delta = 0.0;
  ModelKind model = ModelKind::kTopo;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct NoiseSweepConfig {
  std::vector<double> deltas;
  std::size_t seeds = 5;
  NoiseTarget apply_to = NoiseTarget::kBoth;
  std::vector<ModelKind> models{ModelKind::kTopo, ModelKind::kBase, ModelKind::kMlp};
  /// Worker threads running (delta, seed) cells concurrently.
  std::size_t threads = 1;
};

/// Test accuracy for every (delta, model, seed), sorted by delta, model, seed.
/// Seed s trains with `train.seed + s` and corrupts with the same value.
std::vector<NoiseCell> noise_sweep(const GraphBundle& bundle, const TrainConfig& train,
                                   const NoiseSweepConfig& sweep);

struct NoiseSummary {
  double delta;
  ModelKind model;
  double mean_accuracy;
  std::size_t runs;
};

std::vector<NoiseSummary> summarize(const std::vector<NoiseCell>& cells);

/// `noise_sweep.csv` (delta,model,seed,accuracy) and `noise_sweep.dat`
/// (one row per delta, one mean-accuracy column per model).
void write_noise_outputs(const std::filesystem::path& dir, const std::vector<NoiseCell>& cells);

}  // namespace topomlp
