#include "topomlp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace topomlp {

ModelKind parse_model(std::string_view name) {
  if (name == "topo") return ModelKind::kTopo;
  if (name == "base") return ModelKind::kBase;
  if (name == "mlp") return ModelKind::kMlp;
  throw Error("unknown model '" + std::string(name) + "' (expected topo|base|mlp)");
}

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::kTopo: return "topo";
    case ModelKind::kBase: return "base";
    case ModelKind::kMlp: return "mlp";
  }
  return "?";
}

PreparedComplex prepare_complex(const Graph& graph, const Matrix<float>& node_features, Combiner h) {
  PreparedComplex p;
  p.complex = build_clique_complex(graph);
  p.cochains = make_cochains(node_features, p.complex, h);
  p.structures = StructureSet::from(p.complex);
  return p;
}

Batch sample_batch(const PreparedComplex& data, const GraphBundle& bundle, std::size_t t_v,
                   std::size_t t_e, std::size_t t_f, Rng& rng) {
  const auto& c = data.complex;
  require(t_v > 0 && t_v <= c.n_vertices, "sample_batch: T_v must be in [1, " + std::to_string(c.n_vertices) + "]");
  require(t_e <= c.edges.size(), "sample_batch: T_e exceeds the edge count");
  require(t_f <= c.triangles.size(), "sample_batch: T_f exceeds the triangle count");
  Batch b;
  b.vertices = rng.sample_without_replacement(c.n_vertices, t_v);
  b.edges = rng.sample_without_replacement(c.edges.size(), t_e);
  b.faces = rng.sample_without_replacement(c.triangles.size(), t_f);
  b.x[0] = gather_rows(data.cochains.x0.data, b.vertices);
  b.x[1] = gather_rows(data.cochains.x1.data, b.edges);
  b.x[2] = gather_rows(data.cochains.x2.data, b.faces);
  b.structure.a0 = data.structures.a0.submatrix(b.vertices, b.vertices);
  b.structure.b1 = data.structures.b1.submatrix(b.vertices, b.edges);
  b.structure.b02 = data.structures.b02.submatrix(b.vertices, b.faces);
  b.labels.reserve(t_v);
  for (std::size_t a = 0; a < t_v; ++a) {
    const auto v = b.vertices[a];
    b.labels.push_back(bundle.labels[v]);
    if (bundle.splits[v] == Split::kTrain) b.train_rows.push_back(a);
  }
  return b;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << "epoch,l_v,l_e,l_f,ce,total,val_accuracy\n";
  out << std::setprecision(9);
  for (const auto& r : history)
    out << r.epoch << ',' << r.l_v << ',' << r.l_e << ',' << r.l_f << ',' << r.ce << ',' << r.total << ','
        << r.val_accuracy << '\n';
}

double accuracy(std::span<const int> predictions, const GraphBundle& bundle, Split split) {
  const auto nodes = bundle.nodes_in(split);
  require(!nodes.empty(), "evaluate: split '" + to_string(split) + "' is empty");
  std::size_t correct = 0;
  for (auto v : nodes) correct += predictions[v] == bundle.labels[v];
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

double evaluate_topo(const TopoMLPParams& p, const Matrix<float>& x0, const GraphBundle& bundle, Split split) {
  return accuracy(topo_infer_nodes(x0, p), bundle, split);
}

double evaluate_base(const BaseSCNParams& p, const PreparedComplex& data, const GraphBundle& bundle,
                     Split split) {
  return accuracy(argmax_rows(base_logits(data.cochains, data.structures, p)), bundle, split);
}

namespace {

std::vector<const Matrix<float>*> gradients_of(std::initializer_list<ad::Var<float>> vars) {
  std::vector<const Matrix<float>*> out;
  for (const auto& v : vars) out.push_back(&v.grad());
  return out;
}

ModelDims dims_for(const PreparedComplex& data, const GraphBundle& bundle, std::size_t hidden) {
  return {data.cochains.x0.data.cols(), data.cochains.x1.data.cols(), data.cochains.x2.data.cols(), hidden,
          bundle.classes};
}

// Keeps the parameters with the best validation accuracy, earliest on ties.
template <class Params>
void track_best(TrainResult<Params>& result, const Params& current, EpochRecord& rec, bool have_val,
                const std::function<double()>& val_acc) {
  if (!have_val) {
    result.params = current;
    result.best_epoch = rec.epoch;
    return;
  }
  rec.val_accuracy = val_acc();
  if (result.best_epoch == 0 || rec.val_accuracy > result.best_val_accuracy) {
    result.best_val_accuracy = rec.val_accuracy;
    result.best_epoch = rec.epoch;
    result.params = current;
  }
}

}  // namespace

TrainResult<TopoMLPParams> train_topo(const PreparedComplex& data, const GraphBundle& bundle,
                                      const TrainConfig& cfg, ModelKind kind) {
  require(cfg.epochs > 0, "train: epochs must be positive");
  require(cfg.steps_per_epoch > 0 && cfg.eval_every > 0, "train: steps_per_epoch and eval_every must be positive");
  require(kind != ModelKind::kBase, "train_topo: use train_base for the message-passing model");
  HONCConfig honc = cfg.honc;
  if (kind == ModelKind::kMlp) honc.beta_v = honc.beta_e = honc.beta_f = 0.0;

  const auto& c = data.complex;
  const std::size_t t_v = std::min(cfg.batch_vertices, c.n_vertices);
  // Embeddings that no loss term reads are not computed.
  const std::size_t t_e = honc.beta_e > 0 ? std::min(cfg.batch_edges, c.edges.size()) : 0;
  const std::size_t t_f = honc.beta_f > 0 ? std::min(cfg.batch_faces, c.triangles.size()) : 0;

  auto params = init_topo_params(dims_for(data, bundle, cfg.hidden), cfg.seed);
  ad::Adam<float> adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  Rng rng(cfg.seed ^ 0x5eed5eedULL);
  const bool have_val = !bundle.nodes_in(Split::kVal).empty();

  TrainResult<TopoMLPParams> result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t step = 0; step < cfg.steps_per_epoch; ++step) {
      const auto batch = sample_batch(data, bundle, t_v, t_e, t_f, rng);
      ad::Tape<float> tape;
      const auto w = bind_parameters(tape, params);
      const std::array<ad::Var<float>, 3> x{tape.constant(batch.x[0]), tape.constant(batch.x[1]),
                                            tape.constant(batch.x[2])};
      LossTerms<float> terms;
      try {
        const auto out = topo_forward(x, w, cfg.dropout, true, rng);
        terms = total_loss(out.z, out.y0, batch.structure, batch.labels, batch.train_rows, honc);
      } catch (const Error& e) {
        throw Error("train: epoch " + std::to_string(epoch) + " step " + std::to_string(step) + ": " + e.what());
      }
      tape.backward(terms.total);
      const auto grads = gradients_of({w.input[0], w.input[1], w.input[2], w.embed[0], w.embed[1], w.embed[2], w.head});
      adam.step(params.all(), grads);

      const double inv = 1.0 / static_cast<double>(cfg.steps_per_epoch);
      rec.l_v += terms.l_v * inv;
      rec.l_e += terms.l_e * inv;
      rec.l_f += terms.l_f * inv;
      rec.ce += terms.ce * inv;
      rec.total += static_cast<double>(terms.total.value()(0, 0)) * inv;
    }
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      track_best(result, params, rec, have_val,
                 [&] { return evaluate_topo(params, data.cochains.x0.data, bundle, Split::kVal); });
    }
    result.history.push_back(rec);
  }
  return result;
}

TrainResult<BaseSCNParams> train_base(const PreparedComplex& data, const GraphBundle& bundle,
                                      const TrainConfig& cfg) {
  require(cfg.epochs > 0, "train: epochs must be positive");
  require(cfg.eval_every > 0, "train: eval_every must be positive");
  const auto train_nodes = bundle.nodes_in(Split::kTrain);
  require(!train_nodes.empty(), "train_base: no training nodes");

  auto params = init_base_params(dims_for(data, bundle, cfg.hidden), cfg.seed);
  ad::Adam<float> adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  Rng rng(cfg.seed ^ 0x5eed5eedULL);
  const bool have_val = !bundle.nodes_in(Split::kVal).empty();

  TrainResult<BaseSCNParams> result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    ad::Tape<float> tape;
    const auto w = bind_parameters(tape, params);
    const std::array<ad::Var<float>, 3> x{tape.constant(data.cochains.x0.data), tape.constant(data.cochains.x1.data),
                                          tape.constant(data.cochains.x2.data)};
    ad::Var<float> loss;
    try {
      const auto logits = base_forward(x, data.structures, w, cfg.dropout, true, rng);
      loss = ad::cross_entropy(logits, bundle.labels, train_nodes);
    } catch (const Error& e) {
      throw Error("train_base: epoch " + std::to_string(epoch) + ": " + e.what());
    }
    tape.backward(loss);
    adam.step(params.all(), gradients_of({w.branch[0], w.branch[1], w.branch[2], w.head}));
    rec.ce = rec.total = loss.value()(0, 0);
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      track_best(result, params, rec, have_val, [&] { return evaluate_base(params, data, bundle, Split::kVal); });
    }
    result.history.push_back(rec);
  }
  return result;
}

TimingStats measure_inference(const std::function<void()>& forward, std::size_t runs, std::size_t warmup) {
  require(runs >= 2, "measure_inference: need at least 2 timed runs");
  for (std::size_t i = 0; i < warmup; ++i) forward();
  std::vector<double> samples;
  samples.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    forward();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  double mean = 0.0;
  for (auto s : samples) mean += s;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (auto s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(runs - 1);
  return {mean, std::sqrt(var), runs};
}

}  // namespace topomlp
