#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topomlp/complex.hpp"
#include "topomlp/matrix.hpp"

namespace topomlp {

enum class Split : std::uint8_t { kNone, kTrain, kVal, kTest };

Split parse_split(std::string_view name);
std::string to_string(Split s);

/// On-disk dataset: graph, node features, labels (-1 = unlabeled), split tags.
struct GraphBundle {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t classes = 0;
  Graph graph;
  Matrix<float> features;
  std::vector<int> labels;
  std::vector<Split> splits;

  /// Node ids tagged `s`, ascending.
  std::vector<std::size_t> nodes_in(Split s) const;
  /// Throws on any invariant violation.
  void validate() const;
};

/// Reads meta, edges.tsv, features.bin, labels.tsv, splits.tsv from `dir`.
/// Errors name the file and, for text files, the 1-based line number.
GraphBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const GraphBundle& bundle, const std::filesystem::path& dir);

struct SyntheticSpec {
  std::size_t communities = 2;
  std::size_t nodes_per = 15;
  double p_in = 0.8;
  double p_out = 0.05;
  double feature_noise = 0.1;
  /// Feature width; the first `communities` columns carry the indicator.
  std::size_t feature_dim = 0;  // 0 means `communities`
  std::uint64_t seed = 0;
};

/// Planted-partition graph with indicator-plus-Gaussian features and a
/// seeded 60/20/20 train/val/test split.
GraphBundle make_synthetic(const SyntheticSpec& spec);

}  // namespace topomlp
