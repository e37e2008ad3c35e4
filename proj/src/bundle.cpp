#include "topomlp/bundle.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "topomlp/rng.hpp"

namespace topomlp {

namespace fs = std::filesystem;

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error("unknown split '" + std::string(name) + "' (expected train|val|test)");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kNone: return "none";
  }
  return "?";
}

std::vector<std::size_t> GraphBundle::nodes_in(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == s) out.push_back(i);
  return out;
}

void GraphBundle::validate() const {
  require(n > 0 && d > 0 && classes > 0, "bundle: n, d and classes must be positive");
  require(graph.n_vertices == n, "bundle: graph vertex count != n");
  require(features.rows() == n && features.cols() == d, "bundle: feature matrix is not n x d");
  require(labels.size() == n && splits.size() == n, "bundle: label/split arrays must have n entries");
  for (auto v : features.values()) require(std::isfinite(v), "bundle: non-finite feature value");
  for (std::size_t i = 0; i < n; ++i) {
    require(labels[i] >= -1 && labels[i] < static_cast<int>(classes),
            "bundle: label of node " + std::to_string(i) + " out of range");
    require(splits[i] != Split::kTrain || labels[i] >= 0,
            "bundle: train node " + std::to_string(i) + " is unlabeled");
  }
}

namespace {

struct LineReader {
  std::ifstream in;
  std::string file;
  std::size_t line_no = 0;
  std::string line;

  explicit LineReader(const fs::path& path) : in(path), file(path.filename().string()) {
    require(static_cast<bool>(in), "missing file " + path.string());
  }
  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(file + ":" + std::to_string(line_no) + ": " + what);
  }
};

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('\t', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

GraphBundle load_bundle(const fs::path& dir) {
  GraphBundle b;

  {
    LineReader r(dir / "meta");
    bool have_n = false, have_d = false, have_c = false;
    while (r.next()) {
      const auto eq = r.line.find('=');
      if (eq == std::string::npos) r.fail("expected key=value");
      const std::string_view key(r.line.data(), eq);
      const std::string_view val(r.line.data() + eq + 1, r.line.size() - eq - 1);
      std::size_t v = 0;
      if (!parse_int(val, v)) r.fail("value is not a non-negative integer");
      if (key == "n") {
        b.n = v, have_n = true;
      } else if (key == "d") {
        b.d = v, have_d = true;
      } else if (key == "classes") {
        b.classes = v, have_c = true;
      } else {
        r.fail("unknown key '" + std::string(key) + "'");
      }
    }
    require(have_n && have_d && have_c, "meta: requires n=, d= and classes=");
    require(b.n > 0 && b.d > 0 && b.classes > 0, "meta: n, d and classes must be positive");
  }

  {
    LineReader r(dir / "edges.tsv");
    std::vector<Edge> edges;
    while (r.next()) {
      const auto f = split_tabs(r.line);
      Index u = 0, v = 0;
      if (f.size() != 2 || !parse_int(f[0], u) || !parse_int(f[1], v)) r.fail("expected u<TAB>v");
      if (u >= b.n || v >= b.n) r.fail("vertex index out of range (n=" + std::to_string(b.n) + ")");
      if (u >= v) r.fail("edge must satisfy u < v");
      if (!edges.empty() && !(edges.back() < Edge{u, v})) r.fail("edges must be sorted and unique");
      edges.push_back({u, v});
    }
    b.graph = Graph::make(b.n, std::move(edges));
  }

  {
    const auto path = dir / "features.bin";
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    require(static_cast<bool>(in), "missing file " + path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    const auto expected = b.n * b.d * sizeof(float);
    require(bytes == expected, "features.bin: size " + std::to_string(bytes) + " bytes, expected " +
                                   std::to_string(expected) + " (n*d*4)");
    in.seekg(0);
    b.features = Matrix<float>(b.n, b.d);
    in.read(reinterpret_cast<char*>(b.features.data()), static_cast<std::streamsize>(expected));
    require(static_cast<bool>(in), "features.bin: read failed");
    for (std::size_t i = 0; i < b.features.size(); ++i) {
      require(std::isfinite(b.features.data()[i]),
              "features.bin: non-finite value at row " + std::to_string(i / b.d) + ", column " +
                  std::to_string(i % b.d));
    }
  }

  b.labels.assign(b.n, -1);
  {
    LineReader r(dir / "labels.tsv");
    std::vector<char> seen(b.n, 0);
    while (r.next()) {
      const auto f = split_tabs(r.line);
      std::size_t node = 0;
      int cls = 0;
      if (f.size() != 2 || !parse_int(f[0], node) || !parse_int(f[1], cls)) r.fail("expected node<TAB>class");
      if (node >= b.n) r.fail("node index out of range");
      if (cls < 0 || static_cast<std::size_t>(cls) >= b.classes) r.fail("class out of range");
      if (seen[node]) r.fail("duplicate label for node " + std::to_string(node));
      seen[node] = 1;
      b.labels[node] = cls;
    }
  }

  b.splits.assign(b.n, Split::kNone);
  {
    LineReader r(dir / "splits.tsv");
    while (r.next()) {
      const auto f = split_tabs(r.line);
      std::size_t node = 0;
      if (f.size() != 2 || !parse_int(f[0], node)) r.fail("expected node<TAB>split");
      if (node >= b.n) r.fail("node index out of range");
      Split s;
      try {
        s = parse_split(f[1]);
      } catch (const Error& e) {
        r.fail(e.what());
      }
      if (b.splits[node] != Split::kNone) r.fail("node " + std::to_string(node) + " appears in two splits");
      if (s == Split::kTrain && b.labels[node] < 0) r.fail("train node " + std::to_string(node) + " is unlabeled");
      b.splits[node] = s;
    }
  }

  b.validate();
  return b;
}

void save_bundle(const GraphBundle& b, const fs::path& dir) {
  b.validate();
  fs::create_directories(dir);
  auto open = [&](const char* name, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(dir / name, mode | std::ios::trunc);
    require(static_cast<bool>(out), "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("meta");
    out << "n=" << b.n << "\nd=" << b.d << "\nclasses=" << b.classes << '\n';
  }
  {
    auto out = open("edges.tsv");
    for (const auto& e : b.graph.edges) out << e[0] << '\t' << e[1] << '\n';
  }
  {
    auto out = open("features.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(b.features.data()),
              static_cast<std::streamsize>(b.features.size() * sizeof(float)));
  }
  {
    auto out = open("labels.tsv");
    for (std::size_t i = 0; i < b.n; ++i)
      if (b.labels[i] >= 0) out << i << '\t' << b.labels[i] << '\n';
  }
  {
    auto out = open("splits.tsv");
    for (std::size_t i = 0; i < b.n; ++i)
      if (b.splits[i] != Split::kNone) out << i << '\t' << to_string(b.splits[i]) << '\n';
  }
}

GraphBundle make_synthetic(const SyntheticSpec& spec) {
  require(spec.communities >= 2 && spec.nodes_per >= 2, "make_synthetic: need >= 2 communities of >= 2 nodes");
  require(spec.p_in > spec.p_out, "make_synthetic: p_in must exceed p_out");
  require(spec.p_in <= 1.0 && spec.p_out >= 0.0, "make_synthetic: probabilities must be in [0, 1]");
  require(spec.feature_noise >= 0.0, "make_synthetic: negative feature noise");
  const std::size_t dim = spec.feature_dim == 0 ? spec.communities : spec.feature_dim;
  require(dim >= spec.communities, "make_synthetic: feature_dim must be >= communities");

  Rng rng(spec.seed);
  GraphBundle b;
  b.n = spec.communities * spec.nodes_per;
  b.d = dim;
  b.classes = spec.communities;
  b.labels.resize(b.n);
  for (std::size_t i = 0; i < b.n; ++i) b.labels[i] = static_cast<int>(i / spec.nodes_per);

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < b.n; ++u)
    for (std::size_t v = u + 1; v < b.n; ++v) {
      const double p = b.labels[u] == b.labels[v] ? spec.p_in : spec.p_out;
      if (rng.uniform() < p) edges.push_back({static_cast<Index>(u), static_cast<Index>(v)});
    }
  b.graph = Graph::make(b.n, std::move(edges));

  b.features = Matrix<float>(b.n, dim);
  for (std::size_t i = 0; i < b.n; ++i) {
    auto row = b.features.row(i);
    for (std::size_t c = 0; c < dim; ++c) row[c] = static_cast<float>(spec.feature_noise * rng.normal());
    row[static_cast<std::size_t>(b.labels[i])] += 1.0f;
  }

  const auto order = rng.sample_without_replacement(b.n, b.n);
  const auto n_train = b.n * 6 / 10;
  const auto n_val = b.n * 2 / 10;
  b.splits.assign(b.n, Split::kTest);
  for (std::size_t k = 0; k < b.n; ++k) {
    if (k < n_train) {
      b.splits[order[k]] = Split::kTrain;
    } else if (k < n_train + n_val) {
      b.splits[order[k]] = Split::kVal;
    }
  }
  return b;
}

}  // namespace topomlp
