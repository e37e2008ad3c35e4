#include "topomlp/commands.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

namespace topomlp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_data(const std::string& data) {
  require(!data.empty(), "no dataset given (set data=<bundle dir or name>)");
  if (fs::is_directory(data)) return data;
  if (const char* root = std::getenv("TOPOMLP_DATA_ROOT")) {
    const auto p = fs::path(root) / data;
    if (fs::is_directory(p)) return p;
  }
  const auto p = fs::path("data") / data;
  if (fs::is_directory(p)) return p;
  throw Error("dataset '" + data + "' not found (not a directory, not under $TOPOMLP_DATA_ROOT or ./data)");
}

std::string describe(const ComplexSummary& s) {
  std::ostringstream out;
  out << s.vertices << " vertices, " << s.edges << " edges, " << s.triangles << " triangle"
      << (s.triangles == 1 ? "" : "s");
  return out.str();
}

ComplexSummary build_complex(const fs::path& bundle_dir, const fs::path& out_dir) {
  const auto bundle = load_bundle(bundle_dir);
  const auto c = build_clique_complex(bundle.graph);
  fs::create_directories(out_dir);
  const ComplexSummary s{c.n_vertices, c.edges.size(), c.triangles.size()};
  {
    std::ofstream out(out_dir / "summary.txt", std::ios::trunc);
    out << describe(s) << '\n';
  }
  const std::pair<const char*, SparseStructure> exports[] = {
      {"A0.coo", adjacency_0(c)},        {"B1.coo", boundary_1(c)},         {"B2.coo", boundary_2(c)},
      {"B02.coo", incidence_0_2(c)},     {"L0.coo", hodge_laplacian(c, 0)}, {"L1.coo", hodge_laplacian(c, 1)},
      {"L2.coo", hodge_laplacian(c, 2)},
  };
  for (const auto& [name, m] : exports) {
    std::ofstream out(out_dir / name, std::ios::trunc);
    require(static_cast<bool>(out), "cannot write " + (out_dir / name).string());
    m.write_coo(out);
  }
  return s;
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return out.str();
}

fs::path make_run_dir(const RunConfig& cfg, const std::string& label) {
  fs::path dir = cfg.get("run_dir");
  if (dir.empty()) {
    const auto base = fs::path(cfg.get("out")) / (label + "-" + timestamp());
    dir = base;
    for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  }
  fs::create_directories(dir);
  return dir;
}

struct RunData {
  GraphBundle bundle;
  PreparedComplex train_data;
  PreparedComplex test_data;
};

// Builds the training and test complexes, applying configured edge noise.
RunData load_run_data(const RunConfig& cfg) {
  RunData d;
  d.bundle = load_bundle(resolve_data(cfg.get("data")));
  const auto combiner = parse_combiner(cfg.get("combiner"));
  const auto noise = cfg.noise();
  d.train_data = prepare_complex(d.bundle.graph, d.bundle.features, combiner);
  d.test_data = d.train_data;
  if (noise.delta > 0) {
    const auto corrupted = prepare_complex(perturb_graph(d.bundle.graph, noise), d.bundle.features, combiner);
    if (noise.apply_to != NoiseTarget::kInference) d.train_data = corrupted;
    if (noise.apply_to != NoiseTarget::kTrain) d.test_data = corrupted;
  }
  return d;
}

}  // namespace

TrainOutcome train(const RunConfig& cfg) {
  const auto train_cfg = cfg.train_config();
  const auto model = cfg.model();
  const auto data = load_run_data(cfg);
  const auto run_dir = make_run_dir(cfg, to_string(model));
  cfg.save(run_dir / "config");

  const auto start = std::chrono::steady_clock::now();
  TrainOutcome outcome;
  outcome.run_dir = run_dir;
  std::vector<EpochRecord> history;
  if (model == ModelKind::kBase) {
    auto r = train_base(data.train_data, data.bundle, train_cfg);
    save_checkpoint(run_dir / "best.ckpt", to_tensors(r.params));
    outcome.test_accuracy = evaluate_base(r.params, data.test_data, data.bundle, Split::kTest);
    outcome.best_val_accuracy = r.best_val_accuracy;
    outcome.best_epoch = r.best_epoch;
    history = std::move(r.history);
  } else {
    auto r = train_topo(data.train_data, data.bundle, train_cfg, model);
    save_checkpoint(run_dir / "best.ckpt", to_tensors(r.params));
    outcome.test_accuracy = evaluate_topo(r.params, data.test_data.cochains.x0.data, data.bundle, Split::kTest);
    outcome.best_val_accuracy = r.best_val_accuracy;
    outcome.best_epoch = r.best_epoch;
    history = std::move(r.history);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_history_csv(run_dir / "history.csv", history);

  json metrics = {
      {"model", to_string(model)},
      {"test_accuracy", outcome.test_accuracy},
      {"best_val_accuracy", outcome.best_val_accuracy},
      {"best_epoch", outcome.best_epoch},
      {"epochs", train_cfg.epochs},
      {"vertices", data.train_data.complex.n_vertices},
      {"edges", data.train_data.complex.edges.size()},
      {"triangles", data.train_data.complex.triangles.size()},
      {"timing", {{"train_seconds", seconds}, {"threads", omp_get_max_threads()}}},
  };
  std::ofstream(run_dir / "metrics.json", std::ios::trunc) << metrics.dump(2) << '\n';
  return outcome;
}

double evaluate(const fs::path& run_dir, Split split) {
  const auto cfg = RunConfig::load(run_dir / "config");
  const auto data = load_run_data(cfg);
  const auto tensors = load_checkpoint(run_dir / "best.ckpt");
  if (cfg.model() == ModelKind::kBase) return evaluate_base(base_params_from(tensors), data.test_data, data.bundle, split);
  return evaluate_topo(topo_params_from(tensors), data.test_data.cochains.x0.data, data.bundle, split);
}

std::vector<BenchRow> bench(const BenchOptions& opts) {
  require(!opts.bundles.empty(), "bench: no datasets given");
  std::vector<BenchRow> rows;
  for (const auto& dir : opts.bundles) {
    const auto bundle = load_bundle(dir);
    const auto data = prepare_complex(bundle.graph, bundle.features, opts.combiner);
    const ModelDims dims{bundle.d, bundle.d, bundle.d, opts.hidden, bundle.classes};
    const auto topo = opts.topo_run.empty() ? init_topo_params(dims, 0)
                                            : topo_params_from(load_checkpoint(opts.topo_run / "best.ckpt"));
    const auto base = opts.base_run.empty() ? init_base_params(dims, 0)
                                            : base_params_from(load_checkpoint(opts.base_run / "best.ckpt"));
    BenchRow row;
    row.dataset = dir.filename().string();
    if (row.dataset.empty()) row.dataset = dir.parent_path().filename().string();
    topo_node_logits(data.cochains.x0.data, topo, &row.topo_ops);
    base_logits(data.cochains, data.structures, base, &row.base_ops);
    row.topo = measure_inference([&] { (void)topo_node_logits(data.cochains.x0.data, topo); }, opts.runs, opts.warmup);
    row.base = measure_inference([&] { (void)base_logits(data.cochains, data.structures, base); }, opts.runs,
                                 opts.warmup);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  auto cell = [](const TimingStats& t) {
    std::ostringstream c;
    c << std::setprecision(3) << t.mean_s << " +- " << t.std_s;
    return c.str();
  };
  out << std::left << std::setw(12) << "seconds";
  for (const auto& r : rows) out << " | " << std::setw(20) << r.dataset;
  out << '\n' << std::string(12 + rows.size() * 23, '-') << '\n';
  out << std::setw(12) << "Base model";
  for (const auto& r : rows) out << " | " << std::setw(20) << cell(r.base);
  out << '\n' << std::setw(12) << "Topo-MLP";
  for (const auto& r : rows) out << " | " << std::setw(20) << cell(r.topo);
  out << '\n' << std::setw(12) << "speedup";
  for (const auto& r : rows) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(2) << 1.0 / r.ratio() << "x";
    out << " | " << std::setw(20) << c.str();
  }
  out << '\n' << std::setw(12) << "multiplies";
  for (const auto& r : rows) {
    std::ostringstream c;
    c << r.topo_ops.hidden_multiplies << " vs " << r.base_ops.hidden_multiplies;
    out << " | " << std::setw(20) << c.str();
  }
  out << '\n';
  return out.str();
}

void write_bench_csv(const fs::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << "dataset,model,mean_s,std_s,runs,hidden_multiplies\n" << std::setprecision(9);
  for (const auto& r : rows) {
    out << r.dataset << ",base," << r.base.mean_s << ',' << r.base.std_s << ',' << r.base.runs << ','
        << r.base_ops.hidden_multiplies << '\n';
    out << r.dataset << ",topo," << r.topo.mean_s << ',' << r.topo.std_s << ',' << r.topo.runs << ','
        << r.topo_ops.hidden_multiplies << '\n';
  }
}

std::vector<NoiseCell> noise_sweep(const RunConfig& cfg, fs::path* run_dir_out) {
  const auto bundle = load_bundle(resolve_data(cfg.get("data")));
  NoiseSweepConfig sweep;
  sweep.deltas = cfg.get_double_list("deltas");
  sweep.seeds = cfg.get_size("sweep_seeds");
  sweep.apply_to = parse_noise_target(cfg.get("noise_apply"));
  sweep.threads = cfg.get_size("sweep_workers");
  const auto train_cfg = cfg.train_config();
  const auto run_dir = make_run_dir(cfg, "noise-sweep");
  cfg.save(run_dir / "config");
  const auto cells = topomlp::noise_sweep(bundle, train_cfg, sweep);
  write_noise_outputs(run_dir, cells);
  if (run_dir_out) *run_dir_out = run_dir;
  return cells;
}

std::string render_noise_table(const std::vector<NoiseCell>& cells) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "delta" << std::setw(8) << "model" << "mean accuracy (runs)\n";
  for (const auto& s : summarize(cells)) {
    out << std::setw(8) << s.delta << std::setw(8) << to_string(s.model) << std::fixed << std::setprecision(4)
        << s.mean_accuracy << " (" << s.runs << ")\n";
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

// --- entry point -------------------------------------------------------------

namespace {

// Registers one --<key> option per config key; returns the raw strings.
std::map<std::string, std::string>& add_config_options(CLI::App& app, std::map<std::string, std::string>& store) {
  for (const auto& k : config_keys())
    app.add_option("--" + k.name, store[k.name], k.help + " [default: " + k.default_value + "]");
  return store;
}

RunConfig resolve_config(const std::string& config_file, const CLI::App& app,
                         const std::map<std::string, std::string>& store) {
  RunConfig cfg = config_file.empty() ? RunConfig() : RunConfig::load(config_file);
  for (const auto& [key, value] : store)
    if (app.count("--" + key) > 0) cfg.set(key, value);
  return cfg;
}

void apply_thread_env() {
  if (const char* t = std::getenv("TOPOMLP_THREADS")) {
    const int n = std::atoi(t);
    require(n > 0, "TOPOMLP_THREADS must be a positive integer");
    omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topo-MLP: MLP simplicial node classification trained with higher-order contrastive losses"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build-complex", "build the 2-clique complex of a bundle and export its operators");
  std::string build_data, build_out = "complex";
  build->add_option("--data", build_data, "bundle directory or dataset name")->required();
  build->add_option("--out", build_out, "output directory for summary.txt and *.coo exports");

  auto* train_cmd = app.add_subcommand("train", "train one model and write a run directory");
  std::string train_config_file;
  std::map<std::string, std::string> train_store;
  train_cmd->add_option("--config", train_config_file, "key=value config file; flags override its values");
  add_config_options(*train_cmd, train_store);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a run directory's best checkpoint");
  std::string eval_run, eval_split = "test";
  eval_cmd->add_option("--run-dir", eval_run, "run directory written by train")->required();
  eval_cmd->add_option("--split", eval_split, "train | val | test");

  auto* bench_cmd = app.add_subcommand("bench", "time node inference of Topo-MLP against the base model");
  std::vector<std::string> bench_data;
  std::string bench_topo, bench_base, bench_out, bench_combiner = "mean";
  BenchOptions bench_opts;
  bench_cmd->add_option("--data", bench_data, "one or more bundle directories or dataset names")->required();
  bench_cmd->add_option("--topo-run", bench_topo, "run directory with trained Topo-MLP weights");
  bench_cmd->add_option("--base-run", bench_base, "run directory with trained base-model weights");
  bench_cmd->add_option("--runs", bench_opts.runs, "timed runs per model");
  bench_cmd->add_option("--warmup", bench_opts.warmup, "untimed warmup runs");
  bench_cmd->add_option("--hidden", bench_opts.hidden, "hidden width when weights are freshly initialized");
  bench_cmd->add_option("--combiner", bench_combiner, "feature lifting: max | min | mean | prod");
  bench_cmd->add_option("--out", bench_out, "write bench.csv into this directory");

  auto* sweep_cmd = app.add_subcommand("noise-sweep", "edge-corruption sweep over deltas for topo, base and mlp");
  std::string sweep_config_file;
  std::map<std::string, std::string> sweep_store;
  sweep_cmd->add_option("--config", sweep_config_file, "key=value config file; flags override its values");
  add_config_options(*sweep_cmd, sweep_store);

  auto* synth_cmd = app.add_subcommand("make-synthetic", "write a planted-partition bundle");
  SyntheticSpec synth;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output bundle directory")->required();
  synth_cmd->add_option("--communities", synth.communities, "number of communities (= classes)");
  synth_cmd->add_option("--nodes-per", synth.nodes_per, "nodes per community");
  synth_cmd->add_option("--p-in", synth.p_in, "intra-community edge probability");
  synth_cmd->add_option("--p-out", synth.p_out, "inter-community edge probability");
  synth_cmd->add_option("--feature-noise", synth.feature_noise, "Gaussian feature noise std");
  synth_cmd->add_option("--feature-dim", synth.feature_dim, "feature width (0 = communities)");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    apply_thread_env();
    if (*build) {
      const auto s = build_complex(resolve_data(build_data), build_out);
      std::cout << describe(s) << '\n';
    } else if (*train_cmd) {
      const auto cfg = resolve_config(train_config_file, *train_cmd, train_store);
      const auto r = train(cfg);
      std::cout << "run_dir=" << r.run_dir.string() << "\ntest_accuracy=" << r.test_accuracy
                << "\nbest_val_accuracy=" << r.best_val_accuracy << "\nbest_epoch=" << r.best_epoch << '\n';
    } else if (*eval_cmd) {
      const double acc = evaluate(eval_run, parse_split(eval_split));
      std::cout << eval_split << "_accuracy=" << acc << '\n';
    } else if (*bench_cmd) {
      for (const auto& d : bench_data) bench_opts.bundles.push_back(resolve_data(d));
      bench_opts.topo_run = bench_topo;
      bench_opts.base_run = bench_base;
      bench_opts.combiner = parse_combiner(bench_combiner);
      const auto rows = bench(bench_opts);
      std::cout << render_bench_table(rows);
      std::cout << "threads=" << omp_get_max_threads() << '\n';
      if (!bench_out.empty()) {
        fs::create_directories(bench_out);
        write_bench_csv(fs::path(bench_out) / "bench.csv", rows);
      }
    } else if (*sweep_cmd) {
      const auto cfg = resolve_config(sweep_config_file, *sweep_cmd, sweep_store);
      fs::path dir;
      const auto cells = noise_sweep(cfg, &dir);
      std::cout << render_noise_table(cells) << "run_dir=" << dir.string() << '\n';
    } else if (*synth_cmd) {
      const auto b = make_synthetic(synth);
      save_bundle(b, synth_out);
      std::cout << "n=" << b.n << " d=" << b.d << " classes=" << b.classes << " edges=" << b.graph.edges.size()
                << '\n';
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace topomlp::cli
