#include "nrgcn/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nrgcn {

namespace {

Matrix glorot(int rows, int cols, RandomSource& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  Matrix w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = rng.next_symmetric(a);
  }
  return w;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p,
                    RandomSource& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 - p;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mask(i, j) = rng.next_unit() < keep ? 1.0 / keep : 0.0;
    }
  }
  return mask;
}

void check_layout(const ModelParams& params, const EmbeddingTensor& tensor) {
  if (!plans_equal(params.plan, tensor.plan) ||
      params.feature_dim() != tensor.dim) {
    throw std::runtime_error(
        "configuration error: embedding tensor layout does not match model plan");
  }
}

}  // namespace

ModelParams ModelParams::init(const SamplingPlan& plan, int feature_dim,
                              int hidden, int mlp_hidden, int num_classes,
                              RandomSource& rng) {
  plan.validate();
  ModelParams p;
  p.plan = plan;
  p.w_shared = glorot(hidden, feature_dim, rng);
  p.b_shared = Vector::Zero(hidden);
  p.w_hidden = glorot(mlp_hidden, (plan.num_hops() + 1) * hidden, rng);
  p.b_hidden = Vector::Zero(mlp_hidden);
  p.w_out = glorot(num_classes, mlp_hidden, rng);
  p.b_out = Vector::Zero(num_classes);
  return p;
}

bool ModelParams::all_finite() const {
  return w_shared.allFinite() && b_shared.allFinite() && w_hidden.allFinite() &&
         b_hidden.allFinite() && w_out.allFinite() && b_out.allFinite();
}

ForwardCache forward_batch(const ModelParams& params,
                           const EmbeddingTensor& tensor,
                           const std::vector<int>& nodes, double dropout,
                           RandomSource* dropout_rng) {
  check_layout(params, tensor);
  const int batch = static_cast<int>(nodes.size());
  const int slots = tensor.slots;
  const int dim = tensor.dim;
  const int hidden = params.hidden_dim();
  const int hops = params.plan.num_hops();

  ForwardCache cache;
  cache.slot_inputs.resize(static_cast<Eigen::Index>(batch) * slots, dim);
  for (int b = 0; b < batch; ++b) {
    cache.slot_inputs.middleRows(static_cast<Eigen::Index>(b) * slots, slots) =
        tensor.node_slots(nodes[static_cast<std::size_t>(b)]).cast<double>();
  }

  cache.slot_hidden =
      ((cache.slot_inputs * params.w_shared.transpose()).rowwise() +
       params.b_shared.transpose())
          .cwiseMax(0.0);

  cache.concat = Matrix::Zero(batch, (hops + 1) * hidden);
  for (int hop = 0; hop <= hops; ++hop) {
    const int first = params.plan.slot_index(hop, 0);
    const int repeats =
        hop == 0 ? 1 : params.plan.layers[static_cast<std::size_t>(hop) - 1].repeats;
    for (int b = 0; b < batch; ++b) {
      auto block = cache.concat.block(b, hop * hidden, 1, hidden);
      for (int i = 0; i < repeats; ++i) {
        block += cache.slot_hidden.row(
            static_cast<Eigen::Index>(b) * slots + first + i);
      }
      block /= static_cast<double>(repeats);
    }
  }

  const bool training = dropout_rng != nullptr && dropout > 0.0;
  if (training) {
    cache.concat_mask =
        dropout_mask(cache.concat.rows(), cache.concat.cols(), dropout, *dropout_rng);
    cache.concat_kept = cache.concat.cwiseProduct(cache.concat_mask);
  } else {
    cache.concat_kept = cache.concat;
  }

  cache.mlp_hidden = ((cache.concat_kept * params.w_hidden.transpose()).rowwise() +
                      params.b_hidden.transpose())
                         .cwiseMax(0.0);
  if (training) {
    cache.mlp_mask = dropout_mask(cache.mlp_hidden.rows(), cache.mlp_hidden.cols(),
                                  dropout, *dropout_rng);
    cache.mlp_kept = cache.mlp_hidden.cwiseProduct(cache.mlp_mask);
  } else {
    cache.mlp_kept = cache.mlp_hidden;
  }

  cache.logits = (cache.mlp_kept * params.w_out.transpose()).rowwise() +
                 params.b_out.transpose();
  return cache;
}

Vector forward_node(const ModelParams& params, const EmbeddingTensor& tensor,
                    int node) {
  const auto cache = forward_batch(params, tensor, {node}, 0.0, nullptr);
  return cache.logits.row(0).transpose();
}

double loss_and_grad(const ModelParams& params, const ForwardCache& cache,
                     const std::vector<int>& labels, double weight_decay,
                     Gradients& grads) {
  const int batch = static_cast<int>(cache.logits.rows());
  if (batch == 0) throw std::invalid_argument("empty batch");
  const int slots = params.plan.total_slots();
  const int hidden = params.hidden_dim();
  const int hops = params.plan.num_hops();

  // Softmax cross-entropy, row-stabilized.
  Matrix probs = cache.logits;
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double mx = probs.row(b).maxCoeff();
    probs.row(b) = (probs.row(b).array() - mx).exp();
    const double z = probs.row(b).sum();
    probs.row(b) /= z;
    loss -= std::log(std::max(probs(b, labels[static_cast<std::size_t>(b)]), 1e-300));
  }
  loss /= batch;

  Matrix dlogits = probs;
  for (int b = 0; b < batch; ++b) {
    dlogits(b, labels[static_cast<std::size_t>(b)]) -= 1.0;
  }
  dlogits /= static_cast<double>(batch);

  grads.w_out = dlogits.transpose() * cache.mlp_kept;
  grads.b_out = dlogits.colwise().sum().transpose();

  Matrix dkept = dlogits * params.w_out;
  if (cache.mlp_mask.size() > 0) dkept = dkept.cwiseProduct(cache.mlp_mask);
  const Matrix dmlp_pre =
      dkept.cwiseProduct((cache.mlp_hidden.array() > 0.0).cast<double>().matrix());

  grads.w_hidden = dmlp_pre.transpose() * cache.concat_kept;
  grads.b_hidden = dmlp_pre.colwise().sum().transpose();

  Matrix dconcat = dmlp_pre * params.w_hidden;
  if (cache.concat_mask.size() > 0) dconcat = dconcat.cwiseProduct(cache.concat_mask);

  // Undo the hop mean: each slot receives its hop's slice over S_l.
  Matrix dslot_hidden = Matrix::Zero(cache.slot_hidden.rows(), hidden);
  for (int hop = 0; hop <= hops; ++hop) {
    const int first = params.plan.slot_index(hop, 0);
    const int repeats =
        hop == 0 ? 1 : params.plan.layers[static_cast<std::size_t>(hop) - 1].repeats;
    for (int b = 0; b < batch; ++b) {
      const auto slice =
          dconcat.block(b, hop * hidden, 1, hidden) / static_cast<double>(repeats);
      for (int i = 0; i < repeats; ++i) {
        dslot_hidden.row(static_cast<Eigen::Index>(b) * slots + first + i) = slice;
      }
    }
  }
  const Matrix dslot_pre = dslot_hidden.cwiseProduct(
      (cache.slot_hidden.array() > 0.0).cast<double>().matrix());

  grads.w_shared = dslot_pre.transpose() * cache.slot_inputs;
  grads.b_shared = dslot_pre.colwise().sum().transpose();

  if (weight_decay != 0.0) {
    loss += 0.5 * weight_decay *
            (params.w_shared.squaredNorm() + params.w_hidden.squaredNorm() +
             params.w_out.squaredNorm());
    grads.w_shared += weight_decay * params.w_shared;
    grads.w_hidden += weight_decay * params.w_hidden;
    grads.w_out += weight_decay * params.w_out;
  }
  return loss;
}

AdamState AdamState::init(const ModelParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  auto zeros_like = [](const auto& x) {
    return std::remove_cvref_t<decltype(x)>::Zero(x.rows(), x.cols());
  };
  s.m = {zeros_like(params.w_shared), zeros_like(params.b_shared),
         zeros_like(params.w_hidden), zeros_like(params.b_hidden),
         zeros_like(params.w_out),    zeros_like(params.b_out)};
  s.v = s.m;
  return s;
}

void AdamState::update(ModelParams& params, const Gradients& grads) {
  ++step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  auto apply = [&](auto& p, auto& m_acc, auto& v_acc, const auto& g) {
    m_acc = beta1 * m_acc + (1.0 - beta1) * g;
    v_acc = beta2 * v_acc + (1.0 - beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m_acc.array() / bc1) /
                 ((v_acc.array() / bc2).sqrt() + eps);
  };
  apply(params.w_shared, m.w_shared, v.w_shared, grads.w_shared);
  apply(params.b_shared, m.b_shared, v.b_shared, grads.b_shared);
  apply(params.w_hidden, m.w_hidden, v.w_hidden, grads.w_hidden);
  apply(params.b_hidden, m.b_hidden, v.b_hidden, grads.b_hidden);
  apply(params.w_out, m.w_out, v.w_out, grads.w_out);
  apply(params.b_out, m.b_out, v.b_out, grads.b_out);
}

double evaluate(const ModelParams& params, const EmbeddingTensor& tensor,
                const Labels& labels, const std::vector<int>& mask) {
  if (mask.empty()) throw std::invalid_argument("evaluate: empty mask");
  constexpr int kEvalBatch = 1024;
  int correct = 0;
  for (std::size_t begin = 0; begin < mask.size(); begin += kEvalBatch) {
    const std::size_t end = std::min(mask.size(), begin + kEvalBatch);
    const std::vector<int> chunk(mask.begin() + static_cast<std::ptrdiff_t>(begin),
                                 mask.begin() + static_cast<std::ptrdiff_t>(end));
    const auto cache = forward_batch(params, tensor, chunk, 0.0, nullptr);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      Eigen::Index argmax;
      cache.logits.row(static_cast<Eigen::Index>(b)).maxCoeff(&argmax);
      if (static_cast<int>(argmax) ==
          labels.values[static_cast<std::size_t>(chunk[b])]) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

TrainResult train(ModelParams& params, const EmbeddingTensor& tensor,
                  const Labels& labels, const SplitMasks& masks,
                  const TrainConfig& config) {
  check_layout(params, tensor);
  RandomSource rng(config.seed ^ 0x7261696e5f726e67ULL);
  AdamState adam = AdamState::init(params, config.learning_rate);

  TrainResult result;
  ModelParams best = params;
  int stale_epochs = 0;
  std::vector<int> order = masks.train;
  Gradients grads;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> batch_labels(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        batch_labels[i] = labels.values[static_cast<std::size_t>(batch[i])];
      }
      const auto cache =
          forward_batch(params, tensor, batch, config.dropout, &rng);
      const double loss =
          loss_and_grad(params, cache, batch_labels, config.weight_decay, grads);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      adam.update(params, grads);
      if (!params.all_finite()) {
        throw std::runtime_error(
            "training diverged: non-finite parameters at epoch " +
            std::to_string(epoch));
      }
      epoch_loss += loss;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = batches > 0 ? epoch_loss / batches : 0.0;
    stats.val_accuracy =
        masks.val.empty() ? 0.0 : evaluate(params, tensor, labels, masks.val);
    stats.test_accuracy =
        masks.test.empty() ? 0.0 : evaluate(params, tensor, labels, masks.test);
    stats.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    result.history.push_back(stats);

    if (stats.val_accuracy > result.best_val_accuracy || result.best_epoch < 0) {
      result.best_val_accuracy = stats.val_accuracy;
      result.best_epoch = epoch;
      result.test_accuracy_at_best = stats.test_accuracy;
      best = params;
      stale_epochs = 0;
    } else if (++stale_epochs >= config.patience) {
      break;
    }
  }

  params = best;
  return result;
}

namespace {

constexpr char kCkptMagic[4] = {'N', 'R', 'G', 'M'};
constexpr std::uint32_t kCkptVersion = 1;

void write_block(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const float f = static_cast<float>(m(i, j));
      out.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
  }
}

void write_block(std::ofstream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v(i));
    out.write(reinterpret_cast<const char*>(&f), sizeof(float));
  }
}

void read_block(std::ifstream& in, Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      float f;
      in.read(reinterpret_cast<char*>(&f), sizeof(float));
      m(i, j) = f;
    }
  }
}

void read_block(std::ifstream& in, Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    float f;
    in.read(reinterpret_cast<char*>(&f), sizeof(float));
    v(i) = f;
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kCkptMagic, 4);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u32(kCkptVersion);
  put_u32(static_cast<std::uint32_t>(params.feature_dim()));
  put_u32(static_cast<std::uint32_t>(params.hidden_dim()));
  put_u32(static_cast<std::uint32_t>(params.mlp_hidden_dim()));
  put_u32(static_cast<std::uint32_t>(params.num_classes()));
  put_u32(static_cast<std::uint32_t>(params.plan.num_hops()));
  for (const auto& layer : params.plan.layers) {
    put_u32(static_cast<std::uint32_t>(layer.parents));
    put_u32(static_cast<std::uint32_t>(layer.repeats));
    put_u32(static_cast<std::uint32_t>(layer.subset));
  }
  // Block order: shared FC, MLP hidden, MLP out; weights then bias.
  write_block(out, params.w_shared);
  write_block(out, params.b_shared);
  write_block(out, params.w_hidden);
  write_block(out, params.b_hidden);
  write_block(out, params.w_out);
  write_block(out, params.b_out);
  if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw std::runtime_error("corrupt checkpoint: bad magic in " + path);
  }
  auto get_u32 = [&]() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("corrupt checkpoint: truncated header");
    return v;
  };
  if (get_u32() != kCkptVersion) {
    throw std::runtime_error("corrupt checkpoint: unsupported version");
  }
  const int feature_dim = static_cast<int>(get_u32());
  const int hidden = static_cast<int>(get_u32());
  const int mlp_hidden = static_cast<int>(get_u32());
  const int classes = static_cast<int>(get_u32());
  const int hops = static_cast<int>(get_u32());
  ModelParams p;
  for (int l = 0; l < hops; ++l) {
    SamplingPlan::Layer layer;
    layer.parents = static_cast<int>(get_u32());
    layer.repeats = static_cast<int>(get_u32());
    layer.subset = static_cast<int>(get_u32());
    p.plan.layers.push_back(layer);
  }
  p.w_shared.resize(hidden, feature_dim);
  p.b_shared.resize(hidden);
  p.w_hidden.resize(mlp_hidden, (hops + 1) * hidden);
  p.b_hidden.resize(mlp_hidden);
  p.w_out.resize(classes, mlp_hidden);
  p.b_out.resize(classes);
  read_block(in, p.w_shared);
  read_block(in, p.b_shared);
  read_block(in, p.w_hidden);
  read_block(in, p.b_hidden);
  read_block(in, p.w_out);
  read_block(in, p.b_out);
  if (!in) throw std::runtime_error("corrupt checkpoint: truncated blocks");
  return p;
}

}  // namespace nrgcn
