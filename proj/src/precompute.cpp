#include "nrgcn/precompute.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace nrgcn {

namespace {

constexpr char kMagic[4] = {'N', 'R', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const char* field) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error(std::string("corrupt cache: truncated ") + field);
  return value;
}

}  // namespace

Eigen::VectorXf aggregate_subset(const FeatureMatrix& features,
                                 const std::vector<int>& subset) {
  Eigen::VectorXf out = Eigen::VectorXf::Zero(features.cols());
  if (subset.empty()) return out;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(features.cols());
  for (int u : subset) acc += features.row(u).cast<double>();
  acc /= static_cast<double>(subset.size());
  out = acc.cast<float>();
  return out;
}

EmbeddingTensor build_embedding_tensor(const Graph& g,
                                       const FeatureMatrix& features,
                                       const SamplingPlan& plan,
                                       const std::vector<int>& roots,
                                       std::uint64_t seed, int num_threads) {
  plan.validate();
  EmbeddingTensor tensor;
  tensor.num_nodes = static_cast<int>(roots.size());
  tensor.slots = plan.total_slots();
  tensor.dim = static_cast<int>(features.cols());
  tensor.plan = plan;
  tensor.seed = seed;
  tensor.values.assign(static_cast<std::size_t>(tensor.num_nodes) *
                           tensor.slots * tensor.dim,
                       0.0f);

  auto build_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto rng = RandomSource::for_node(seed, static_cast<std::uint64_t>(roots[r]));
      const SampleSet set = multi_sample(g, roots[r], plan, rng);
      float* row = tensor.values.data() +
                   r * static_cast<std::size_t>(tensor.slots) * tensor.dim;
      for (int s = 0; s < tensor.slots; ++s) {
        const Eigen::VectorXf agg =
            aggregate_subset(features, set.subsets[static_cast<std::size_t>(s)]);
        std::memcpy(row + static_cast<std::size_t>(s) * tensor.dim, agg.data(),
                    static_cast<std::size_t>(tensor.dim) * sizeof(float));
      }
    }
  };

  const std::size_t n = roots.size();
  if (num_threads <= 1 || n < 64) {
    build_range(0, n);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (n + num_threads - 1) / num_threads;
    for (int t = 0; t < num_threads; ++t) {
      const std::size_t begin = std::min(n, static_cast<std::size_t>(t) * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) workers.emplace_back(build_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }
  return tensor;
}

EmbeddingTensor build_embedding_tensor(const Graph& g,
                                       const FeatureMatrix& features,
                                       const SamplingPlan& plan,
                                       std::uint64_t seed, int num_threads) {
  std::vector<int> roots(static_cast<std::size_t>(g.num_nodes()));
  for (int v = 0; v < g.num_nodes(); ++v) roots[static_cast<std::size_t>(v)] = v;
  return build_embedding_tensor(g, features, plan, roots, seed, num_threads);
}

bool plans_equal(const SamplingPlan& a, const SamplingPlan& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].parents != b.layers[i].parents ||
        a.layers[i].repeats != b.layers[i].repeats ||
        a.layers[i].subset != b.layers[i].subset) {
      return false;
    }
  }
  return a.exact_hop_filter == b.exact_hop_filter;
}

void save_cache(const EmbeddingTensor& tensor, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open cache for writing: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(tensor.num_nodes));
  write_pod(out, static_cast<std::uint32_t>(tensor.slots));
  write_pod(out, static_cast<std::uint32_t>(tensor.dim));
  write_pod(out, static_cast<std::uint32_t>(tensor.plan.num_hops()));
  for (const auto& layer : tensor.plan.layers) {
    write_pod(out, static_cast<std::uint32_t>(layer.parents));
    write_pod(out, static_cast<std::uint32_t>(layer.repeats));
    write_pod(out, static_cast<std::uint32_t>(layer.subset));
  }
  write_pod(out, static_cast<std::uint8_t>(tensor.plan.exact_hop_filter));
  write_pod(out, tensor.seed);
  char hash[32] = {};
  std::memcpy(hash, tensor.source_hash.data(),
              std::min<std::size_t>(32, tensor.source_hash.size()));
  out.write(hash, 32);
  out.write(reinterpret_cast<const char*>(tensor.values.data()),
            static_cast<std::streamsize>(tensor.values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to cache: " + path);
}

EmbeddingTensor load_cache(const std::string& path,
                           const std::string* expected_hash,
                           const SamplingPlan* expected_plan,
                           const std::uint64_t* expected_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing cache file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("corrupt cache: bad magic in " + path);
  }
  if (read_pod<std::uint32_t>(in, "version") != kVersion) {
    throw std::runtime_error("corrupt cache: unsupported version in " + path);
  }
  EmbeddingTensor tensor;
  tensor.num_nodes = static_cast<int>(read_pod<std::uint32_t>(in, "num_nodes"));
  tensor.slots = static_cast<int>(read_pod<std::uint32_t>(in, "slots"));
  tensor.dim = static_cast<int>(read_pod<std::uint32_t>(in, "dim"));
  const auto hops = read_pod<std::uint32_t>(in, "hops");
  for (std::uint32_t l = 0; l < hops; ++l) {
    SamplingPlan::Layer layer;
    layer.parents = static_cast<int>(read_pod<std::uint32_t>(in, "plan"));
    layer.repeats = static_cast<int>(read_pod<std::uint32_t>(in, "plan"));
    layer.subset = static_cast<int>(read_pod<std::uint32_t>(in, "plan"));
    tensor.plan.layers.push_back(layer);
  }
  tensor.plan.exact_hop_filter = read_pod<std::uint8_t>(in, "plan") != 0;
  tensor.seed = read_pod<std::uint64_t>(in, "seed");
  char hash[33] = {};
  in.read(hash, 32);
  if (!in) throw std::runtime_error("corrupt cache: truncated hash");
  tensor.source_hash = hash;

  if (tensor.slots != tensor.plan.total_slots()) {
    throw std::runtime_error("corrupt cache: slot count does not match plan");
  }
  if (expected_hash && tensor.source_hash != *expected_hash) {
    throw std::runtime_error("stale cache: bundle hash differs (cache " +
                             tensor.source_hash + ", bundle " + *expected_hash + ")");
  }
  if (expected_plan && !plans_equal(tensor.plan, *expected_plan)) {
    throw std::runtime_error("stale cache: sampling plan differs");
  }
  if (expected_seed && tensor.seed != *expected_seed) {
    throw std::runtime_error("stale cache: sampling seed differs");
  }

  tensor.values.resize(static_cast<std::size_t>(tensor.num_nodes) *
                       tensor.slots * tensor.dim);
  in.read(reinterpret_cast<char*>(tensor.values.data()),
          static_cast<std::streamsize>(tensor.values.size() * sizeof(float)));
  if (!in) throw std::runtime_error("corrupt cache: truncated values");
  in.peek();
  if (!in.eof()) throw std::runtime_error("corrupt cache: trailing bytes");
  return tensor;
}

}  // namespace nrgcn
