#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "topomlp/bundle.hpp"
#include "topomlp/cochain.hpp"
#include "topomlp/honc.hpp"
#include "topomlp/model.hpp"

namespace topomlp {

enum class ModelKind { kTopo, kBase, kMlp };

ModelKind parse_model(std::string_view name);
std::string to_string(ModelKind m);

struct TrainConfig {
  std::size_t epochs = 400;
  std::size_t hidden = 256;
  double dropout = 0.6;
  double lr = 0.01;
  double weight_decay = 5e-4;
  /// Per-batch sample sizes; clamped to the population.
  std::size_t batch_vertices = 2000;
  std::size_t batch_edges = 2000;
  std::size_t batch_faces = 2000;
  std::size_t steps_per_epoch = 1;
  HONCConfig honc;
  Combiner combiner = Combiner::kMean;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
};

/// A graph turned into a clique complex with lifted cochains and the
/// structure operators both models consume.
struct PreparedComplex {
  SimplicialComplex2 complex;
  CochainSet cochains;
  StructureSet structures;
};

PreparedComplex prepare_complex(const Graph& graph, const Matrix<float>& node_features, Combiner h);

struct Batch {
  std::vector<std::size_t> vertices;
  std::vector<std::size_t> edges;
  std::vector<std::size_t> faces;
  std::array<Matrix<float>, 3> x;
  BatchStructure structure;
  /// Label per batch vertex (-1 where unlabeled).
  std::vector<int> labels;
  /// Batch positions of training-split vertices.
  std::vector<std::size_t> train_rows;
};

/// Uniform sample without replacement of `t_v` vertices, `t_e` edges and
/// `t_f` faces, with features and structure restricted to the sample. All
/// three structure blocks share the one vertex sample.
Batch sample_batch(const PreparedComplex& data, const GraphBundle& bundle, std::size_t t_v,
                   std::size_t t_e, std::size_t t_f, Rng& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double l_v = 0.0;
  double l_e = 0.0;
  double l_f = 0.0;
  double ce = 0.0;
  double total = 0.0;
  double val_accuracy = 0.0;
};

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

template <class Params>
struct TrainResult {
  Params params;  // best validation checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

/// Topo-MLP training. `kind` kMlp forces all HONC multipliers to zero.
TrainResult<TopoMLPParams> train_topo(const PreparedComplex& data, const GraphBundle& bundle,
                                      const TrainConfig& cfg, ModelKind kind = ModelKind::kTopo);

/// Full-batch training of the message-passing baseline on `data`'s structure.
TrainResult<BaseSCNParams> train_base(const PreparedComplex& data, const GraphBundle& bundle,
                                      const TrainConfig& cfg);

double accuracy(std::span<const int> predictions, const GraphBundle& bundle, Split split);
double evaluate_topo(const TopoMLPParams& p, const Matrix<float>& x0, const GraphBundle& bundle, Split split);
double evaluate_base(const BaseSCNParams& p, const PreparedComplex& data, const GraphBundle& bundle,
                     Split split);

struct TimingStats {
  double mean_s = 0.0;
  double std_s = 0.0;
  std::size_t runs = 0;
};

/// Wall-clock of `forward` over `runs` timed calls after `warmup` untimed ones.
TimingStats measure_inference(const std::function<void()>& forward, std::size_t runs, std::size_t warmup);

}  // namespace topomlp
