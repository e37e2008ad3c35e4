#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "topomlp/noise.hpp"
#include "topomlp/trainer.hpp"

namespace topomlp {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every key a run config accepts, in file order.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value run configuration. Unknown keys are rejected; values are
/// checked when converted to typed configs.
class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  TrainConfig train_config() const;
  ModelKind model() const { return parse_model(get("model")); }
  NoiseSpec noise() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace topomlp
