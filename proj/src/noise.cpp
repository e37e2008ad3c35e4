#include "topomlp/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace topomlp {

NoiseTarget parse_noise_target(std::string_view name) {
  if (name == "train") return NoiseTarget::kTrain;
  if (name == "inference") return NoiseTarget::kInference;
  if (name == "both") return NoiseTarget::kBoth;
  throw Error("unknown noise target '" + std::string(name) + "' (expected train|inference|both)");
}

std::string to_string(NoiseTarget t) {
  switch (t) {
    case NoiseTarget::kTrain: return "train";
    case NoiseTarget::kInference: return "inference";
    case NoiseTarget::kBoth: return "both";
  }
  return "?";
}

Graph perturb_graph(const Graph& g, const NoiseSpec& spec) {
  require(spec.delta >= 0.0 && spec.delta < 1.0, "perturb_graph: delta must be in [0, 1)");
  const auto m = g.edges.size();
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(m) * spec.delta));
  if (k == 0) return g;
  const auto n = g.n_vertices;
  const auto pairs = n * (n - 1) / 2;
  require(pairs - m >= k, "perturb_graph: graph has " + std::to_string(pairs - m) + " non-edges, need " +
                              std::to_string(k));

  Rng rng(spec.seed);
  const auto removed = rng.sample_without_replacement(m, k);
  std::vector<char> drop(m, 0);
  for (auto i : removed) drop[i] = 1;

  std::set<Edge> added;
  const std::size_t cap = 1000 * k;
  std::size_t draws = 0;
  while (added.size() < k) {
    require(draws++ < cap, "perturb_graph: non-edge sampling exceeded " + std::to_string(cap) + " draws");
    auto u = static_cast<Index>(rng.below(n));
    auto v = static_cast<Index>(rng.below(n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (g.has_edge(u, v)) continue;
    added.insert({u, v});
  }

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    if (!drop[i]) edges.push_back(g.edges[i]);
  edges.insert(edges.end(), added.begin(), added.end());
  return Graph::make(n, std::move(edges));
}

namespace {

std::vector<NoiseCell> run_cell(const GraphBundle& bundle, const PreparedComplex& clean, const TrainConfig& train,
                                const NoiseSweepConfig& sweep, double delta, std::uint64_t seed) {
  const auto corrupted_graph = perturb_graph(bundle.graph, {delta, seed, sweep.apply_to});
  const auto corrupted = prepare_complex(corrupted_graph, bundle.features, train.combiner);
  const bool train_noisy = sweep.apply_to != NoiseTarget::kInference;
  const bool test_noisy = sweep.apply_to != NoiseTarget::kTrain;
  const auto& train_data = train_noisy ? corrupted : clean;
  const auto& test_data = test_noisy ? corrupted : clean;

  TrainConfig cfg = train;
  cfg.seed = seed;
  std::vector<NoiseCell> out;
  for (auto model : sweep.models) {
    double acc = 0.0;
    if (model == ModelKind::kBase) {
      const auto r = train_base(train_data, bundle, cfg);
      acc = evaluate_base(r.params, test_data, bundle, Split::kTest);
    } else {
      const auto r = train_topo(train_data, bundle, cfg, model);
      acc = evaluate_topo(r.params, test_data.cochains.x0.data, bundle, Split::kTest);
    }
    out.push_back({delta, model, seed, acc});
  }
  return out;
}

}  // namespace

std::vector<NoiseCell> noise_sweep(const GraphBundle& bundle, const TrainConfig& train,
                                   const NoiseSweepConfig& sweep) {
  require(!sweep.deltas.empty(), "noise_sweep: empty delta list");
  require(sweep.seeds > 0, "noise_sweep: need at least one seed");
  const auto clean = prepare_complex(bundle.graph, bundle.features, train.combiner);

  struct Job {
    double delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto d : sweep.deltas)
    for (std::size_t s = 0; s < sweep.seeds; ++s) jobs.push_back({d, train.seed + s});

  std::vector<NoiseCell> cells;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        auto r = run_cell(bundle, clean, train, sweep, jobs[i].delta, jobs[i].seed);
        std::lock_guard lock(mu);
        cells.insert(cells.end(), r.begin(), r.end());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const auto n_threads = std::max<std::size_t>(1, std::min(sweep.threads, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(cells.begin(), cells.end(), [](const NoiseCell& a, const NoiseCell& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.model != b.model) return a.model < b.model;
    return a.seed < b.seed;
  });
  return cells;
}

std::vector<NoiseSummary> summarize(const std::vector<NoiseCell>& cells) {
  std::map<std::pair<double, ModelKind>, std::pair<double, std::size_t>> acc;
  for (const auto& c : cells) {
    auto& [sum, count] = acc[{c.delta, c.model}];
    sum += c.accuracy;
    ++count;
  }
  std::vector<NoiseSummary> out;
  for (const auto& [key, v] : acc) out.push_back({key.first, key.second, v.first / v.second, v.second});
  return out;
}

void write_noise_outputs(const std::filesystem::path& dir, const std::vector<NoiseCell>& cells) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "noise_sweep.csv", std::ios::trunc);
    require(static_cast<bool>(out), "cannot write noise_sweep.csv");
    out << "delta,model,seed,accuracy\n" << std::setprecision(9);
    for (const auto& c : cells) out << c.delta << ',' << to_string(c.model) << ',' << c.seed << ',' << c.accuracy << '\n';
  }
  const auto summary = summarize(cells);
  std::vector<ModelKind> models;
  std::vector<double> deltas;
  for (const auto& s : summary) {
    if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
    if (std::find(deltas.begin(), deltas.end(), s.delta) == deltas.end()) deltas.push_back(s.delta);
  }
  std::sort(models.begin(), models.end());
  std::ofstream out(dir / "noise_sweep.dat", std::ios::trunc);
  require(static_cast<bool>(out), "cannot write noise_sweep.dat");
  out << "# delta";
  for (auto m : models) out << ' ' << to_string(m);
  out << '\n' << std::setprecision(6);
  for (auto d : deltas) {
    out << d;
    for (auto m : models) {
      auto it = std::find_if(summary.begin(), summary.end(),
                             [&](const NoiseSummary& s) { return s.delta == d && s.model == m; });
      out << ' ' << (it == summary.end() ? std::nan("") : it->mean_accuracy);
    }
    out << '\n';
  }
}

}  // namespace topomlp
