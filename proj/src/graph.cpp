#include "nrgcn/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nrgcn {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& file, int line, const std::string& what) {
  std::ostringstream os;
  os << file;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  throw std::runtime_error(os.str());
}

[[noreturn]] void fail(const std::string& file, const std::string& what) {
  fail(file, 0, what);
}

std::ifstream open_or_throw(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) fail(path, "missing file");
  return in;
}

}  // namespace

Graph Graph::from_edges(int num_nodes,
                        const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> lists(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
      throw std::runtime_error("edge endpoint out of range: " +
                               std::to_string(u) + " " + std::to_string(v));
    }
    if (u == v) continue;
    lists[u].push_back(v);
    lists[v].push_back(u);
  }
  Graph g;
  g.num_nodes_ = num_nodes;
  g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (int v = 0; v < num_nodes; ++v) {
    auto& l = lists[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.offsets_[static_cast<std::size_t>(v) + 1] =
        g.offsets_[v] + static_cast<int>(l.size());
  }
  g.adj_.reserve(g.offsets_.back());
  for (const auto& l : lists) g.adj_.insert(g.adj_.end(), l.begin(), l.end());
  return g;
}

bool Graph::has_edge(int u, int v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<int, int>> Graph::edge_list() const {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(num_edges()));
  for (int v = 0; v < num_nodes_; ++v) {
    for (int u : neighbors(v)) {
      if (v < u) edges.emplace_back(v, u);
    }
  }
  return edges;
}

std::vector<int> bfs_distances(const Graph& g, int root, int max_hop) {
  std::vector<int> dist(g.num_nodes(), -1);
  dist[root] = 0;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (max_hop >= 0 && dist[v] >= max_hop) continue;
    for (int u : g.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

KHopFrontier khop_frontier(const Graph& g, int v, int l) {
  KHopFrontier frontier{v, l, {}};
  const auto dist = bfs_distances(g, v, l);
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (dist[u] == l) frontier.members.push_back(u);
  }
  return frontier;
}

void row_normalize(FeatureMatrix& features) {
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double sum = features.row(i).cast<double>().sum();
    if (sum != 0.0) {
      features.row(i) *= static_cast<float>(1.0 / sum);
    }
  }
}

Bundle load_bundle(const std::string& dir, bool normalize_features) {
  Bundle b;

  const std::string meta_path = dir + "/meta.json";
  json meta;
  {
    auto in = open_or_throw(meta_path, std::ios::in);
    try {
      in >> meta;
    } catch (const json::exception& e) {
      fail(meta_path, std::string("malformed JSON: ") + e.what());
    }
  }
  const int n = meta.at("num_nodes").get<int>();
  const int f = meta.at("feature_dim").get<int>();
  const int c = meta.at("num_classes").get<int>();
  if (n <= 0 || f <= 0 || c <= 0) fail(meta_path, "nonpositive dimension");

  const std::string edges_path = dir + "/edges.txt";
  std::vector<std::pair<int, int>> edges;
  {
    auto in = open_or_throw(edges_path, std::ios::in);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      long long u, v;
      if (!(ls >> u >> v)) fail(edges_path, lineno, "malformed line");
      if (u < 0 || u >= n || v < 0 || v >= n) {
        fail(edges_path, lineno, "node ID out of range");
      }
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  }
  b.graph = Graph::from_edges(n, edges);

  const std::string feat_path = dir + "/features.bin";
  {
    auto in = open_or_throw(feat_path, std::ios::in | std::ios::binary);
    b.features.resize(n, f);
    const std::streamsize bytes =
        static_cast<std::streamsize>(n) * f * sizeof(float);
    in.read(reinterpret_cast<char*>(b.features.data()), bytes);
    if (in.gcount() != bytes) fail(feat_path, "truncated feature matrix");
    in.peek();
    if (!in.eof()) fail(feat_path, "trailing bytes after N*F floats");
  }
  if (normalize_features) row_normalize(b.features);

  const std::string labels_path = dir + "/labels.txt";
  {
    auto in = open_or_throw(labels_path, std::ios::in);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      long long y;
      if (!(ls >> y)) fail(labels_path, lineno, "malformed line");
      if (y < 0 || y >= c) fail(labels_path, lineno, "label out of range");
      b.labels.values.push_back(static_cast<int>(y));
    }
    if (static_cast<int>(b.labels.values.size()) != n) {
      fail(labels_path, "expected " + std::to_string(n) + " labels, got " +
                            std::to_string(b.labels.values.size()));
    }
  }
  b.labels.num_classes = c;

  const std::string splits_path = dir + "/splits.json";
  {
    auto in = open_or_throw(splits_path, std::ios::in);
    json splits;
    try {
      in >> splits;
    } catch (const json::exception& e) {
      fail(splits_path, std::string("malformed JSON: ") + e.what());
    }
    auto read_mask = [&](const char* key) {
      std::vector<int> ids = splits.at(key).get<std::vector<int>>();
      for (int id : ids) {
        if (id < 0 || id >= n) fail(splits_path, "node ID out of range in " + std::string(key));
      }
      return ids;
    };
    b.masks.train = read_mask("train");
    b.masks.val = read_mask("val");
    b.masks.test = read_mask("test");
    std::vector<char> seen(n, 0);
    for (const auto* mask : {&b.masks.train, &b.masks.val, &b.masks.test}) {
      for (int id : *mask) {
        if (seen[id]) fail(splits_path, "splits are not disjoint at node " + std::to_string(id));
        seen[id] = 1;
      }
    }
  }
  return b;
}

void save_bundle(const Bundle& bundle, const std::string& dir) {
  const int n = bundle.graph.num_nodes();
  {
    std::ofstream out(dir + "/meta.json");
    json meta{{"num_nodes", n},
              {"feature_dim", bundle.features.cols()},
              {"num_classes", bundle.labels.num_classes}};
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir + "/edges.txt");
    for (const auto& [u, v] : bundle.graph.edge_list()) {
      out << u << " " << v << "\n";
    }
  }
  {
    std::ofstream out(dir + "/features.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bundle.features.data()),
              static_cast<std::streamsize>(bundle.features.size()) *
                  sizeof(float));
  }
  {
    std::ofstream out(dir + "/labels.txt");
    for (int y : bundle.labels.values) out << y << "\n";
  }
  {
    std::ofstream out(dir + "/splits.json");
    json splits{{"train", bundle.masks.train},
                {"val", bundle.masks.val},
                {"test", bundle.masks.test}};
    out << splits.dump() << "\n";
  }
}

std::string bundle_hash(const std::string& dir) {
  // Two FNV-1a 64-bit lanes with different offset bases.
  std::uint64_t h1 = 0xcbf29ce484222325ULL;
  std::uint64_t h2 = 0x84222325cbf29ce4ULL;
  auto absorb = [&](const char* data, std::streamsize len) {
    for (std::streamsize i = 0; i < len; ++i) {
      const auto byte = static_cast<unsigned char>(data[i]);
      h1 = (h1 ^ byte) * 0x100000001b3ULL;
      h2 = (h2 ^ byte) * 0x100000001b3ULL;
    }
  };
  for (const char* name :
       {"meta.json", "edges.txt", "features.bin", "labels.txt", "splits.json"}) {
    auto in = open_or_throw(dir + "/" + name, std::ios::in | std::ios::binary);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
      absorb(buf, in.gcount());
    }
    absorb(name, static_cast<std::streamsize>(std::string(name).size()));
  }
  char hex[33];
  std::snprintf(hex, sizeof(hex), "%016llx%016llx",
                static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return hex;
}

}  // namespace nrgcn
