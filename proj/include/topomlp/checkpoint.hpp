#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "topomlp/matrix.hpp"

namespace topomlp {

struct NamedTensor {
  std::string name;
  Matrix<float> value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Layout: "TMLP", u32 version, u32 count, then per tensor u16 name length,
// name bytes, u32 rows, u32 cols, rows*cols f32. All little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace topomlp
