#ifndef TED_NETWORK_HPP
#define TED_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ted/rng.hpp"
#include "ted/types.hpp"

// Dense feedforward networks with one or more output heads sharing a
// trunk. The activations of the last hidden layer double as the
// instance embedding for neighbor search.

namespace ted {

enum class Activation { ReLU, Identity };
enum class HeadKind { SoftmaxCrossEntropy, LinearMeanSquaredError };

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out x in
  VectorX<Scalar> bias;
  Activation activation = Activation::ReLU;
};

template <typename Scalar>
struct OutputHead {
  MatrixX<Scalar> weight;  // out x embedding
  VectorX<Scalar> bias;
  HeadKind kind = HeadKind::SoftmaxCrossEntropy;
};

struct HeadSpec {
  Index width = 1;
  HeadKind kind = HeadKind::SoftmaxCrossEntropy;
};

template <typename Scalar>
struct Network {
  Index input_width = 0;
  std::vector<DenseLayer<Scalar>> hidden;  // embedding layer is hidden.back()
  std::vector<OutputHead<Scalar>> heads;

  Index embedding_width() const { return hidden.empty() ? input_width : hidden.back().weight.rows(); }
  bool all_finite() const {
    for (const auto& l : hidden)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    for (const auto& h : heads)
      if (!h.weight.allFinite() || !h.bias.allFinite()) return false;
    return true;
  }
};

/// Per-head targets: class indices for softmax heads, a value matrix
/// (rows = samples) for mean-squared-error heads.
template <typename Scalar>
struct HeadTarget {
  VectorXi classes;
  MatrixX<Scalar> values;

  static HeadTarget of_classes(VectorXi c) {
    HeadTarget t;
    t.classes = std::move(c);
    return t;
  }
  static HeadTarget of_values(MatrixX<Scalar> v) {
    HeadTarget t;
    t.values = std::move(v);
    return t;
  }
};

template <typename Scalar>
struct NetworkGradients {
  std::vector<MatrixX<Scalar>> hidden_weight;
  std::vector<VectorX<Scalar>> hidden_bias;
  std::vector<MatrixX<Scalar>> head_weight;
  std::vector<VectorX<Scalar>> head_bias;

  static NetworkGradients zeros_like(const Network<Scalar>& net) {
    NetworkGradients g;
    for (const auto& l : net.hidden) {
      g.hidden_weight.push_back(MatrixX<Scalar>::Zero(l.weight.rows(), l.weight.cols()));
      g.hidden_bias.push_back(VectorX<Scalar>::Zero(l.bias.size()));
    }
    for (const auto& h : net.heads) {
      g.head_weight.push_back(MatrixX<Scalar>::Zero(h.weight.rows(), h.weight.cols()));
      g.head_bias.push_back(VectorX<Scalar>::Zero(h.bias.size()));
    }
    return g;
  }
};

struct TrainConfig {
  Index epochs = 1;  // 0 leaves the network unchanged
  Index batch_size = 32;
  double learning_rate = 0.01;
  std::vector<double> hidden_learning_rates;  // optional per-layer override, one per hidden layer
  std::vector<double> head_weights;           // loss multipliers, default 1 per head
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate(std::size_t hidden_count, std::size_t head_count) const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
    if (!hidden_learning_rates.empty() && hidden_learning_rates.size() != hidden_count)
      throw std::invalid_argument("per-layer learning rates must match hidden layer count");
    if (!head_weights.empty() && head_weights.size() != head_count)
      throw std::invalid_argument("head weight count must match head count");
    for (double w : head_weights)
      if (w < 0) throw std::invalid_argument("head weights must be nonnegative");
  }

  std::vector<double> effective_head_weights(std::size_t head_count) const {
    if (head_weights.empty()) return std::vector<double>(head_count, 1.0);
    return head_weights;
  }
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero
/// biases; the draw order is fixed, so a seed pins every parameter.
template <typename Scalar>
Network<Scalar> init_network(Index input_width, const std::vector<Index>& hidden_sizes,
                             const std::vector<HeadSpec>& heads, std::uint64_t seed,
                             const std::vector<Activation>& activations = {}) {
  if (input_width < 1) throw std::invalid_argument("input width must be >= 1");
  if (hidden_sizes.empty()) throw std::invalid_argument("at least one hidden layer is required (the embedding layer)");
  for (Index w : hidden_sizes)
    if (w < 1) throw std::invalid_argument("zero-width hidden layer");
  if (heads.empty()) throw std::invalid_argument("at least one output head is required");
  for (const auto& h : heads)
    if (h.width < 1) throw std::invalid_argument("zero-width head");
  if (!activations.empty() && activations.size() != hidden_sizes.size())
    throw std::invalid_argument("activation list must match hidden layer count");

  Rng rng(seed);
  auto glorot = [&rng](Index rows, Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    MatrixX<Scalar> w(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) w(i, j) = static_cast<Scalar>(uniform_real(rng, -bound, bound));
    return w;
  };

  Network<Scalar> net;
  net.input_width = input_width;
  Index in = input_width;
  for (std::size_t l = 0; l < hidden_sizes.size(); ++l) {
    DenseLayer<Scalar> layer;
    layer.weight = glorot(hidden_sizes[l], in);
    layer.bias = VectorX<Scalar>::Zero(hidden_sizes[l]);
    layer.activation = activations.empty() ? Activation::ReLU : activations[l];
    in = hidden_sizes[l];
    net.hidden.push_back(std::move(layer));
  }
  for (const auto& spec : heads) {
    OutputHead<Scalar> head;
    head.weight = glorot(spec.width, in);
    head.bias = VectorX<Scalar>::Zero(spec.width);
    head.kind = spec.kind;
    net.heads.push_back(std::move(head));
  }
  return net;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

template <typename Scalar>
MatrixX<Scalar> apply_activation(const MatrixX<Scalar>& z, Activation a) {
  if (a == Activation::Identity) return z;
  return z.cwiseMax(Scalar(0));
}

/// Row-stabilized softmax.
template <typename Scalar>
MatrixX<Scalar> softmax_rows(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

template <typename Scalar>
struct ForwardTrace {
  std::vector<MatrixX<Scalar>> inputs;   // inputs[l] feeds hidden layer l; inputs[0] = X
  std::vector<MatrixX<Scalar>> preacts;  // per hidden layer
  MatrixX<Scalar> embedding;             // post-activation of the last hidden layer
  std::vector<MatrixX<Scalar>> head_logits;
  std::vector<MatrixX<Scalar>> head_outputs;  // probabilities for softmax heads, logits otherwise
};

template <typename Scalar>
ForwardTrace<Scalar> forward_batch(const Network<Scalar>& net, const MatrixX<Scalar>& x) {
  if (x.cols() != net.input_width) {
    std::ostringstream msg;
    msg << "forward: input has " << x.cols() << " columns, network expects " << net.input_width;
    throw std::invalid_argument(msg.str());
  }
  ForwardTrace<Scalar> t;
  t.inputs.push_back(x);
  MatrixX<Scalar> a = x;
  for (const auto& layer : net.hidden) {
    MatrixX<Scalar> z = (a * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    t.preacts.push_back(z);
    a = apply_activation(z, layer.activation);
    t.inputs.push_back(a);
  }
  t.embedding = a;
  t.inputs.pop_back();  // keep only per-layer inputs
  for (const auto& head : net.heads) {
    MatrixX<Scalar> z = (a * head.weight.transpose()).rowwise() + head.bias.transpose();
    t.head_logits.push_back(z);
    t.head_outputs.push_back(head.kind == HeadKind::SoftmaxCrossEntropy ? softmax_rows(z) : z);
  }
  return t;
}

template <typename Scalar>
struct ForwardResult {
  std::vector<VectorX<Scalar>> head_outputs;
  VectorX<Scalar> embedding;
};

/// Single-sample forward: per-head outputs plus the embedding vector.
template <typename Scalar>
ForwardResult<Scalar> forward(const Network<Scalar>& net, const VectorX<Scalar>& x) {
  MatrixX<Scalar> row = x.transpose();
  ForwardTrace<Scalar> t = forward_batch(net, row);
  ForwardResult<Scalar> r;
  for (const auto& out : t.head_outputs) r.head_outputs.push_back(out.row(0).transpose());
  r.embedding = t.embedding.row(0).transpose();
  return r;
}

/// Embeddings for a batch of rows.
template <typename Scalar>
MatrixX<Scalar> embed(const Network<Scalar>& net, const MatrixX<Scalar>& x) {
  return forward_batch(net, x).embedding;
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

/// Accumulates trunk gradients given d loss / d embedding for the
/// batch captured in `t`.
template <typename Scalar>
void backprop_embedding(const Network<Scalar>& net, const ForwardTrace<Scalar>& t, MatrixX<Scalar> d_embedding,
                        NetworkGradients<Scalar>& g) {
  MatrixX<Scalar> d_a = std::move(d_embedding);
  for (std::size_t l = net.hidden.size(); l-- > 0;) {
    const auto& layer = net.hidden[l];
    // ReLU subgradient at 0 is taken as 0.
    MatrixX<Scalar> d_z = layer.activation == Activation::Identity
                              ? d_a
                              : (t.preacts[l].array() > Scalar(0)).template cast<Scalar>() * d_a.array();
    g.hidden_weight[l] += d_z.transpose() * t.inputs[l];
    g.hidden_bias[l] += d_z.colwise().sum().transpose();
    if (l > 0) d_a = d_z * layer.weight;
  }
}

/// Weighted multi-head loss: sum_h w_h * (mean cross-entropy | MSE
/// averaged over batch and output dimensions). Gradients are exact for
/// this expression.
template <typename Scalar>
std::pair<Scalar, NetworkGradients<Scalar>> loss_and_gradients(const Network<Scalar>& net,
                                                               const MatrixX<Scalar>& x,
                                                               const std::vector<HeadTarget<Scalar>>& targets,
                                                               const std::vector<double>& head_weights = {}) {
  if (x.rows() == 0) throw std::invalid_argument("loss_and_gradients: empty batch");
  if (targets.size() != net.heads.size())
    throw std::invalid_argument("loss_and_gradients: one target per head required");
  const std::vector<double> weights =
      head_weights.empty() ? std::vector<double>(net.heads.size(), 1.0) : head_weights;
  if (weights.size() != net.heads.size())
    throw std::invalid_argument("loss_and_gradients: head weight count mismatch");

  const ForwardTrace<Scalar> t = forward_batch(net, x);
  const Index n = x.rows();
  NetworkGradients<Scalar> g = NetworkGradients<Scalar>::zeros_like(net);

  Scalar loss = 0;
  MatrixX<Scalar> d_embedding = MatrixX<Scalar>::Zero(n, net.embedding_width());
  for (std::size_t h = 0; h < net.heads.size(); ++h) {
    const auto& head = net.heads[h];
    const Scalar w = static_cast<Scalar>(weights[h]);
    MatrixX<Scalar> d_out;  // d loss / d head preactivation
    if (head.kind == HeadKind::SoftmaxCrossEntropy) {
      const VectorXi& classes = targets[h].classes;
      if (classes.size() != n) throw std::invalid_argument("loss_and_gradients: class target size mismatch");
      const MatrixX<Scalar>& logits = t.head_logits[h];
      Scalar ce = 0;
      for (Index i = 0; i < n; ++i) {
        const int c = classes(i);
        if (c < 0 || c >= logits.cols()) throw std::out_of_range("loss_and_gradients: class index out of range");
        const Scalar m = logits.row(i).maxCoeff();
        const Scalar lse = m + std::log((logits.row(i).array() - m).exp().sum());
        ce += lse - logits(i, c);
      }
      ce /= static_cast<Scalar>(n);
      loss += w * ce;
      d_out = t.head_outputs[h];
      for (Index i = 0; i < n; ++i) d_out(i, classes(i)) -= Scalar(1);
      d_out *= w / static_cast<Scalar>(n);
    } else {
      const MatrixX<Scalar>& target = targets[h].values;
      if (target.rows() != n || target.cols() != head.weight.rows())
        throw std::invalid_argument("loss_and_gradients: value target shape mismatch");
      const MatrixX<Scalar> residual = t.head_outputs[h] - target;
      const Scalar scale = Scalar(1) / static_cast<Scalar>(n * target.cols());
      loss += w * residual.squaredNorm() * scale;
      d_out = residual * (Scalar(2) * scale * w);
    }
    g.head_weight[h] = d_out.transpose() * t.embedding;
    g.head_bias[h] = d_out.colwise().sum().transpose();
    d_embedding += d_out * head.weight;
  }

  if (!std::isfinite(static_cast<double>(loss)))
    throw std::runtime_error("loss_and_gradients: non-finite loss (diverged parameters or bad inputs)");

  backprop_embedding(net, t, std::move(d_embedding), g);
  return {loss, std::move(g)};
}

// ---------------------------------------------------------------------------
// SGD
// ---------------------------------------------------------------------------

template <typename Scalar>
void apply_gradients(Network<Scalar>& net, const NetworkGradients<Scalar>& g, const TrainConfig& config) {
  for (std::size_t l = 0; l < net.hidden.size(); ++l) {
    const double lr =
        config.hidden_learning_rates.empty() ? config.learning_rate : config.hidden_learning_rates[l];
    net.hidden[l].weight -= static_cast<Scalar>(lr) * g.hidden_weight[l];
    net.hidden[l].bias -= static_cast<Scalar>(lr) * g.hidden_bias[l];
  }
  for (std::size_t h = 0; h < net.heads.size(); ++h) {
    net.heads[h].weight -= static_cast<Scalar>(config.learning_rate) * g.head_weight[h];
    net.heads[h].bias -= static_cast<Scalar>(config.learning_rate) * g.head_bias[h];
  }
}

template <typename Scalar>
struct TrainResult {
  Network<Scalar> net;
  std::vector<Scalar> epoch_loss;  // mean per-sample loss per epoch
};

namespace detail {

template <typename Scalar>
std::vector<HeadTarget<Scalar>> gather_targets(const std::vector<HeadTarget<Scalar>>& targets,
                                               const std::vector<Index>& order, Index begin, Index count) {
  std::vector<HeadTarget<Scalar>> out;
  out.reserve(targets.size());
  for (const auto& t : targets) {
    HeadTarget<Scalar> b;
    if (t.classes.size() > 0) {
      b.classes.resize(count);
      for (Index i = 0; i < count; ++i) b.classes(i) = t.classes(order[static_cast<std::size_t>(begin + i)]);
    }
    if (t.values.size() > 0) {
      b.values.resize(count, t.values.cols());
      for (Index i = 0; i < count; ++i) b.values.row(i) = t.values.row(order[static_cast<std::size_t>(begin + i)]);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace detail

/// Plain minibatch SGD. Shuffle order and batch partition are fixed by
/// the seed, so identical inputs give bitwise-identical trajectories.
template <typename Scalar>
TrainResult<Scalar> train_sgd(Network<Scalar> net, const MatrixX<Scalar>& x,
                              const std::vector<HeadTarget<Scalar>>& targets, const TrainConfig& config) {
  config.validate(net.hidden.size(), net.heads.size());
  const Index n = x.rows();
  if (n == 0) throw std::invalid_argument("train_sgd: empty training set");
  const std::vector<double> weights = config.effective_head_weights(net.heads.size());

  TrainResult<Scalar> result;
  result.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
  Rng rng(config.seed);
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<Index> order = permutation(n, rng, config.shuffle);
    Scalar epoch_loss = 0;
    for (Index begin = 0; begin < n; begin += config.batch_size) {
      const Index count = std::min(config.batch_size, n - begin);
      MatrixX<Scalar> xb(count, x.cols());
      for (Index i = 0; i < count; ++i) xb.row(i) = x.row(order[static_cast<std::size_t>(begin + i)]);
      const auto batch_targets = detail::gather_targets(targets, order, begin, count);
      auto [loss, grads] = loss_and_gradients(net, xb, batch_targets, weights);
      if (!std::isfinite(static_cast<double>(loss))) {
        std::ostringstream msg;
        msg << "train_sgd diverged: non-finite loss at epoch " << epoch << ", batch offset " << begin;
        throw std::runtime_error(msg.str());
      }
      apply_gradients(net, grads, config);
      epoch_loss += loss * static_cast<Scalar>(count);
    }
    if (!net.all_finite()) {
      std::ostringstream msg;
      msg << "train_sgd diverged: non-finite parameters after epoch " << epoch;
      throw std::runtime_error(msg.str());
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<Scalar>(n));
  }
  result.net = std::move(net);
  return result;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
std::vector<std::pair<Scalar*, Index>> parameter_spans(Network<Scalar>& net) {
  std::vector<std::pair<Scalar*, Index>> spans;
  for (auto& l : net.hidden) {
    spans.emplace_back(l.weight.data(), l.weight.size());
    spans.emplace_back(l.bias.data(), l.bias.size());
  }
  for (auto& h : net.heads) {
    spans.emplace_back(h.weight.data(), h.weight.size());
    spans.emplace_back(h.bias.data(), h.bias.size());
  }
  return spans;
}

template <typename Scalar>
std::vector<std::pair<const Scalar*, Index>> gradient_spans(const NetworkGradients<Scalar>& g) {
  std::vector<std::pair<const Scalar*, Index>> spans;
  for (std::size_t l = 0; l < g.hidden_weight.size(); ++l) {
    spans.emplace_back(g.hidden_weight[l].data(), g.hidden_weight[l].size());
    spans.emplace_back(g.hidden_bias[l].data(), g.hidden_bias[l].size());
  }
  for (std::size_t h = 0; h < g.head_weight.size(); ++h) {
    spans.emplace_back(g.head_weight[h].data(), g.head_weight[h].size());
    spans.emplace_back(g.head_bias[h].data(), g.head_bias[h].size());
  }
  return spans;
}

}  // namespace detail

/// Central finite differences vs analytic gradients over a seeded
/// random parameter subset; returns the max of
/// |g_fd - g_an| / max(1, |g_fd|, |g_an|).
template <typename Scalar, typename LossAndGradFn>
Scalar gradient_check(const Network<Scalar>& net, LossAndGradFn&& fn, Scalar epsilon, std::uint64_t seed,
                      Index sample_count = 200) {
  if (!(epsilon > 0)) throw std::invalid_argument("gradient_check: epsilon must be positive");
  const auto [base_loss, analytic] = fn(net);
  (void)base_loss;
  const auto grad_spans = detail::gradient_spans(analytic);

  Network<Scalar> probe = net;
  auto spans = detail::parameter_spans(probe);
  Index total = 0;
  for (const auto& [ptr, size] : spans) total += size;

  Rng rng(seed);
  const Index checks = std::min(sample_count, total);
  Scalar max_err = 0;
  for (Index c = 0; c < checks; ++c) {
    Index flat = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(total)));
    std::size_t block = 0;
    while (flat >= spans[block].second) {
      flat -= spans[block].second;
      ++block;
    }
    Scalar* slot = spans[block].first + flat;
    const Scalar saved = *slot;
    *slot = saved + epsilon;
    const Scalar up = fn(probe).first;
    *slot = saved - epsilon;
    const Scalar down = fn(probe).first;
    *slot = saved;

    const Scalar fd = (up - down) / (Scalar(2) * epsilon);
    const Scalar an = grad_spans[block].first[flat];
    const Scalar err = std::abs(fd - an) / std::max({Scalar(1), std::abs(fd), std::abs(an)});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

/// Convenience wrapper for the standard multi-head loss.
template <typename Scalar>
Scalar gradient_check(const Network<Scalar>& net, const MatrixX<Scalar>& x,
                      const std::vector<HeadTarget<Scalar>>& targets, const std::vector<double>& head_weights,
                      Scalar epsilon = Scalar(1e-5), std::uint64_t seed = 0, Index sample_count = 200) {
  return gradient_check(
      net, [&](const Network<Scalar>& n) { return loss_and_gradients(n, x, targets, head_weights); }, epsilon,
      seed, sample_count);
}

}  // namespace ted

#endif  // TED_NETWORK_HPP
