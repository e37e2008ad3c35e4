#include "topomlp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace topomlp {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"model", "topo", "model to train: topo | base | mlp (topo with all HONC multipliers zero)"},
      {"data", "", "bundle directory, or a dataset name looked up under $TOPOMLP_DATA_ROOT and ./data"},
      {"out", "runs", "parent directory for timestamped run directories"},
      {"run_dir", "", "explicit run directory (overrides the timestamped default)"},
      {"epochs", "400", "training epochs"},
      {"hidden", "256", "width of every hidden/embedding layer"},
      {"dropout", "0.6", "dropout rate after the first activation"},
      {"lr", "0.01", "Adam learning rate"},
      {"weight_decay", "5e-4", "L2 penalty added to the gradient"},
      {"batch_vertices", "2000", "vertices sampled per batch (T_v), clamped to |V|"},
      {"batch_edges", "2000", "edges sampled per batch (T_e), clamped to |E|"},
      {"batch_faces", "2000", "triangles sampled per batch (T_f), clamped to |F|"},
      {"steps_per_epoch", "1", "batches per epoch"},
      {"mu_v", "2.0", "node HONC temperature"},
      {"mu_e", "2.0", "edge HONC temperature"},
      {"mu_f", "2.0", "face HONC temperature"},
      {"beta_v", "1.0", "node HONC multiplier"},
      {"beta_e", "1.0", "edge HONC multiplier"},
      {"beta_f", "1.0", "face HONC multiplier"},
      {"exclude_diagonal", "true", "leave i == j out of the node HONC denominator"},
      {"signed_b1", "false", "use signed node-edge incidence as edge HONC weights"},
      {"honc_reduction", "sum", "combine per-simplex HONC losses by sum | mean"},
      {"combiner", "mean", "edge/face feature lifting: max | min | mean | prod"},
      {"seed", "0", "initialization, sampling and dropout seed"},
      {"eval_every", "1", "validation interval in epochs"},
      {"noise_delta", "0", "edge corruption ratio in [0, 1) for train"},
      {"noise_seed", "0", "edge corruption seed"},
      {"noise_apply", "both", "where corruption applies: train | inference | both"},
      {"sweep_seeds", "5", "seeds per delta in noise-sweep"},
      {"sweep_workers", "1", "concurrent noise-sweep cells"},
      {"deltas", "0,0.1,0.3,0.5,0.7", "comma-separated noise ratios for noise-sweep"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + path.string());
  for (const auto& k : config_keys()) out << k.name << '=' << values_.at(k.name) << '\n';
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  require(it != values_.end(), "unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), "unknown config key '" + key + "'");
  return it->second;
}

namespace {

double to_double(const std::string& key, const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  require(ec == std::errc() && ptr == end && !s.empty(), "config " + key + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

double RunConfig::get_double(const std::string& key) const { return to_double(key, get(key)); }

std::size_t RunConfig::get_size(const std::string& key) const {
  const auto& s = get(key);
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  require(ec == std::errc() && ptr == end && !s.empty(),
          "config " + key + ": '" + s + "' is not a non-negative integer");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error("config " + key + ": '" + s + "' is not a boolean");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.epochs = get_size("epochs");
  c.hidden = get_size("hidden");
  c.dropout = get_double("dropout");
  c.lr = get_double("lr");
  c.weight_decay = get_double("weight_decay");
  c.batch_vertices = get_size("batch_vertices");
  c.batch_edges = get_size("batch_edges");
  c.batch_faces = get_size("batch_faces");
  c.steps_per_epoch = get_size("steps_per_epoch");
  c.honc.mu_v = get_double("mu_v");
  c.honc.mu_e = get_double("mu_e");
  c.honc.mu_f = get_double("mu_f");
  c.honc.beta_v = get_double("beta_v");
  c.honc.beta_e = get_double("beta_e");
  c.honc.beta_f = get_double("beta_f");
  c.honc.exclude_diagonal = get_bool("exclude_diagonal");
  c.honc.signed_b1 = get_bool("signed_b1");
  const auto& red = get("honc_reduction");
  require(red == "sum" || red == "mean", "config honc_reduction: expected sum|mean");
  c.honc.reduction = red == "sum" ? HoncReduction::kSum : HoncReduction::kMean;
  c.combiner = parse_combiner(get("combiner"));
  c.seed = get_size("seed");
  c.eval_every = get_size("eval_every");

  require(c.epochs > 0, "config epochs: must be positive");
  require(c.hidden > 0, "config hidden: must be positive");
  require(c.dropout >= 0 && c.dropout < 1, "config dropout: must be in [0, 1)");
  require(c.lr > 0, "config lr: must be positive");
  require(c.batch_vertices > 0, "config batch_vertices: must be positive");
  require(c.honc.mu_v > 0 && c.honc.mu_e > 0 && c.honc.mu_f > 0, "config mu_*: temperatures must be positive");
  require(c.honc.beta_v >= 0 && c.honc.beta_e >= 0 && c.honc.beta_f >= 0, "config beta_*: multipliers must be >= 0");
  require(c.weight_decay >= 0, "config weight_decay: must be >= 0");
  return c;
}

NoiseSpec RunConfig::noise() const {
  NoiseSpec s;
  s.delta = get_double("noise_delta");
  s.seed = get_size("noise_seed");
  s.apply_to = parse_noise_target(get("noise_apply"));
  require(s.delta >= 0 && s.delta < 1, "config noise_delta: must be in [0, 1)");
  return s;
}

}  // namespace topomlp
