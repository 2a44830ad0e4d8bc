#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "nrgcn/graph.hpp"
#include "nrgcn/sampler.hpp"

namespace nrgcn {

// Precomputed mean-aggregated raw features, N x M x F with
// M = 1 + sum of repeats. Immutable once built.
struct EmbeddingTensor {
  int num_nodes = 0;
  int slots = 0;
  int dim = 0;
  SamplingPlan plan;
  std::uint64_t seed = 0;
  std::string source_hash;       // bundle content hash, 32 hex chars
  std::vector<float> values;     // node-major, then slot, then feature

  using SlotMap = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic,
                                                 Eigen::Dynamic, Eigen::RowMajor>>;

  // M x F view of one node's slot matrix.
  SlotMap node_slots(int v) const {
    return SlotMap(values.data() +
                       static_cast<std::size_t>(v) * slots * dim,
                   slots, dim);
  }
};

// Mean of the subset's feature rows, accumulated in 64-bit; zero vector
// for the empty subset.
Eigen::VectorXf aggregate_subset(const FeatureMatrix& features,
                                 const std::vector<int>& subset);

// One multi_sample per root, every subset mean-aggregated into its slot.
// Per-root rng streams derive from the seed, so the result is independent
// of thread count and root order.
EmbeddingTensor build_embedding_tensor(const Graph& g,
                                       const FeatureMatrix& features,
                                       const SamplingPlan& plan,
                                       const std::vector<int>& roots,
                                       std::uint64_t seed, int num_threads = 1);

// Convenience: all nodes as roots.
EmbeddingTensor build_embedding_tensor(const Graph& g,
                                       const FeatureMatrix& features,
                                       const SamplingPlan& plan,
                                       std::uint64_t seed, int num_threads = 1);

// Cache file: "NRGC" header with shape, plan, seed and bundle hash, then
// raw little-endian floats. Round-trip is bit-exact.
void save_cache(const EmbeddingTensor& tensor, const std::string& path);

// Throws on corrupt files. When expected_hash / expected_plan /
// expected_seed are given, a mismatch raises a stale-cache error naming
// the differing field.
EmbeddingTensor load_cache(const std::string& path,
                           const std::string* expected_hash = nullptr,
                           const SamplingPlan* expected_plan = nullptr,
                           const std::uint64_t* expected_seed = nullptr);

bool plans_equal(const SamplingPlan& a, const SamplingPlan& b);

}  // namespace nrgcn
