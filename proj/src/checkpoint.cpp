#include "topomlp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "topomlp/error.hpp"

namespace topomlp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and bundle I/O assume a little-endian host");

namespace {

template <class U>
void put(std::ofstream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class U>
U get(std::ifstream& in, const std::filesystem::path& path) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(in), "checkpoint " + path.string() + ": truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot open " + path.string() + " for writing");
  out.write("TMLP", 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    require(t.name.size() <= std::numeric_limits<std::uint16_t>::max(), "checkpoint: name too long");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.cols()));
    out.write(reinterpret_cast<const char*>(t.value.data()),
              static_cast<std::streamsize>(t.value.size() * sizeof(float)));
  }
  require(static_cast<bool>(out), "write failed: " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in && std::memcmp(magic, "TMLP", 4) == 0, "checkpoint " + path.string() + ": bad magic");
  const auto version = get<std::uint32_t>(in, path);
  require(version == kCheckpointVersion,
          "checkpoint " + path.string() + ": unsupported version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in, path);
  std::vector<NamedTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name.resize(get<std::uint16_t>(in, path));
    in.read(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    const auto rows = get<std::uint32_t>(in, path);
    const auto cols = get<std::uint32_t>(in, path);
    t.value = Matrix<float>(rows, cols);
    in.read(reinterpret_cast<char*>(t.value.data()),
            static_cast<std::streamsize>(t.value.size() * sizeof(float)));
    require(static_cast<bool>(in), "checkpoint " + path.string() + ": truncated tensor " + t.name);
    tensors.push_back(std::move(t));
  }
  in.peek();
  require(in.eof(), "checkpoint " + path.string() + ": trailing bytes");
  return tensors;
}

}  // namespace topomlp
