#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "nrgcn/graph.hpp"
#include "nrgcn/precompute.hpp"
#include "nrgcn/rng.hpp"

namespace nrgcn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Shared FC (one theta for every hop and repeat) plus a 2-layer MLP head.
struct ModelParams {
  Matrix w_shared;  // H x F
  Vector b_shared;
  Matrix w_hidden;  // H2 x (K+1)*H
  Vector b_hidden;
  Matrix w_out;     // C x H2
  Vector b_out;
  SamplingPlan plan;

  int feature_dim() const { return static_cast<int>(w_shared.cols()); }
  int hidden_dim() const { return static_cast<int>(w_shared.rows()); }
  int mlp_hidden_dim() const { return static_cast<int>(w_hidden.rows()); }
  int num_classes() const { return static_cast<int>(w_out.rows()); }

  // Glorot-uniform weights, zero biases.
  static ModelParams init(const SamplingPlan& plan, int feature_dim, int hidden,
                          int mlp_hidden, int num_classes, RandomSource& rng);

  bool all_finite() const;
};

// Gradient structure mirroring ModelParams.
struct Gradients {
  Matrix w_shared;
  Vector b_shared;
  Matrix w_hidden;
  Vector b_hidden;
  Matrix w_out;
  Vector b_out;
};

// Everything backprop needs from one forward pass over a batch.
struct ForwardCache {
  Matrix slot_inputs;   // (B*M) x F
  Matrix slot_hidden;   // (B*M) x H, post-ReLU
  Matrix concat;        // B x (K+1)*H, post hop-mean, pre dropout
  Matrix concat_kept;   // after dropout (== concat at eval)
  Matrix mlp_hidden;    // B x H2, post-ReLU
  Matrix mlp_kept;      // after dropout
  Matrix logits;        // B x C
  Matrix concat_mask;   // inverted-dropout scale factors (empty at eval)
  Matrix mlp_mask;
};

// Batched Eq.-style forward: shared FC per slot, mean over each hop's
// repeats, concatenation, 2-layer MLP. dropout_rng == nullptr runs the
// deterministic eval path.
ForwardCache forward_batch(const ModelParams& params,
                           const EmbeddingTensor& tensor,
                           const std::vector<int>& nodes, double dropout,
                           RandomSource* dropout_rng);

// Single-node forward; returns C logits.
Vector forward_node(const ModelParams& params, const EmbeddingTensor& tensor,
                    int node);

// Mean softmax cross-entropy plus 0.5 * wd * ||W||^2 over the weight
// matrices, with analytic gradients through mean, concat, ReLU and FC.
double loss_and_grad(const ModelParams& params, const ForwardCache& cache,
                     const std::vector<int>& labels, double weight_decay,
                     Gradients& grads);

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(const ModelParams& params, double lr);
  void update(ModelParams& params, const Gradients& grads);
};

struct TrainConfig {
  int batch_size = 256;
  int max_epochs = 500;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  int patience = 50;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
  double test_accuracy_at_best = 0.0;
};

// Mini-batch Adam over shuffled train nodes; keeps the best-validation
// parameters and stops after `patience` non-improving epochs. Throws on
// a non-finite loss.
TrainResult train(ModelParams& params, const EmbeddingTensor& tensor,
                  const Labels& labels, const SplitMasks& masks,
                  const TrainConfig& config);

// Fraction of mask nodes whose argmax logit matches the label. Throws on
// an empty mask.
double evaluate(const ModelParams& params, const EmbeddingTensor& tensor,
                const Labels& labels, const std::vector<int>& mask);

// Checkpoint file: "NRGM" header + float32 parameter blocks.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace nrgcn
