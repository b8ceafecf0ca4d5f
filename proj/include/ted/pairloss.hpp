#ifndef TED_PAIRLOSS_HPP
#define TED_PAIRLOSS_HPP

#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ted/network.hpp"
#include "ted/rng.hpp"
#include "ted/types.hpp"

// Pairwise cosine embedding losses: pull pairs with similar labels (or
// explanations) together, push dissimilar pairs below a cosine margin,
// leave buffer-zone pairs untouched.

namespace ted {

enum class NeighborRule { ContinuousThreshold, CategoricalExact };

enum class YStatus { Neighbor, NonNeighbor, Buffer };
enum class EStatus { Neighbor, NonNeighbor, Buffer, Excluded };

struct PairStatus {
  YStatus y = YStatus::Buffer;
  EStatus e = EStatus::Buffer;

  bool operator==(const PairStatus&) const = default;
  /// Neither side produces a loss term; such pairs carry no signal.
  bool zero_loss() const {
    return y == YStatus::Buffer && (e == EStatus::Buffer || e == EStatus::Excluded);
  }
};

struct PairLossConfig {
  double c1 = 0.1, c2 = 0.3;  // thresholds on ||y_a - y_b||_1
  double c3 = 0.2, c4 = 0.2;  // thresholds on ||e_a - e_b||_1
  double m1 = 0.25, m2 = 0.25;
  double w = 0.1;  // weight on the E loss in the combined objective
  NeighborRule neighbor_rule_y = NeighborRule::ContinuousThreshold;
  NeighborRule neighbor_rule_e = NeighborRule::ContinuousThreshold;

  void validate() const {
    if (!(c1 <= c2) || !(c3 <= c4))
      throw std::invalid_argument("pair loss thresholds must satisfy c1 <= c2 and c3 <= c4");
    if (m1 < 0 || m1 > 1 || m2 < 0 || m2 > 1)
      throw std::invalid_argument("pair loss margins must lie in [0, 1]");
    if (w < 0 || w > 1) throw std::invalid_argument("E-loss weight must lie in [0, 1]");
  }

  // Named presets from the validated hyperparameter settings
  // (c1, c2, c3, c4, m1, m2, w).
  static PairLossConfig aadb() { return {0.1, 0.3, 0.2, 0.2, 0.25, 0.25, 0.1}; }
  static PairLossConfig olfactory() { return {10.0, 20.0, 0.0272, 0.0272, 0.25, 0.25, 1.0}; }
  static PairLossConfig melanoma() {
    PairLossConfig cfg{0, 0, 0, 0, 0.75, 0.75, 1.0};
    cfg.neighbor_rule_y = NeighborRule::CategoricalExact;
    cfg.neighbor_rule_e = NeighborRule::CategoricalExact;
    return cfg;
  }
};

/// Which similarity signal drives embedding training.
enum class PairLossMode { SimilarityY, SimilarityE, Joint };

// ---------------------------------------------------------------------------
// Status
// ---------------------------------------------------------------------------

/// Continuous rule: neighbors at l1 distance <= c1, non-neighbors
/// above c2, buffer in between. Categorical Y: exact match decides.
/// Categorical E: equal explanations are neighbors, unequal labels are
/// non-neighbors, and equal-label/unequal-explanation pairs are
/// excluded from the E loss.
template <typename DerivedYA, typename DerivedYB, typename DerivedEA, typename DerivedEB>
PairStatus pair_status(const Eigen::MatrixBase<DerivedYA>& y_a, const Eigen::MatrixBase<DerivedYB>& y_b,
                       const Eigen::MatrixBase<DerivedEA>& e_a, const Eigen::MatrixBase<DerivedEB>& e_b,
                       const PairLossConfig& cfg) {
  cfg.validate();
  if (y_a.size() != y_b.size() || e_a.size() != e_b.size())
    throw std::invalid_argument("pair_status: mismatched value dimensions within a pair");

  PairStatus status;
  const bool y_equal = (y_a - y_b).template lpNorm<1>() == 0;
  if (cfg.neighbor_rule_y == NeighborRule::CategoricalExact) {
    status.y = y_equal ? YStatus::Neighbor : YStatus::NonNeighbor;
  } else {
    const double dy = (y_a - y_b).template lpNorm<1>();
    status.y = dy <= cfg.c1 ? YStatus::Neighbor : (dy > cfg.c2 ? YStatus::NonNeighbor : YStatus::Buffer);
  }
  if (cfg.neighbor_rule_e == NeighborRule::CategoricalExact) {
    const bool e_equal = (e_a - e_b).template lpNorm<1>() == 0;
    if (e_equal)
      status.e = EStatus::Neighbor;
    else if (!y_equal)
      status.e = EStatus::NonNeighbor;
    else
      status.e = EStatus::Excluded;
  } else {
    const double de = (e_a - e_b).template lpNorm<1>();
    status.e = de <= cfg.c3 ? EStatus::Neighbor : (de > cfg.c4 ? EStatus::NonNeighbor : EStatus::Buffer);
  }
  return status;
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

/// Cosine similarity with an epsilon guard on the norms.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b,
                                            typename DerivedA::Scalar epsilon = 1e-12,
                                            bool* degenerate = nullptr) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (degenerate) *degenerate = na < epsilon || nb < epsilon;
  return a.dot(b) / (std::max(na, epsilon) * std::max(nb, epsilon));
}

template <typename Scalar>
struct PairLossTerms {
  Scalar loss_y = 0;
  Scalar loss_e = 0;
  Scalar combined = 0;
  bool degenerate_embedding = false;  // an epsilon-guarded zero-norm input
};

template <typename Scalar>
Scalar margin_case_loss(Scalar cos_sim, Scalar margin, bool neighbor) {
  return neighbor ? Scalar(1) - cos_sim : std::max(cos_sim - margin, Scalar(0));
}

/// Neighbor pairs pay 1 - cos, non-neighbor pairs pay
/// max(cos - margin, 0), buffer and excluded pairs pay nothing;
/// combined = loss_y + w * loss_e.
template <typename DerivedA, typename DerivedB>
PairLossTerms<typename DerivedA::Scalar> pair_loss(const Eigen::MatrixBase<DerivedA>& f_a,
                                                   const Eigen::MatrixBase<DerivedB>& f_b,
                                                   const PairStatus& status, const PairLossConfig& cfg) {
  using Scalar = typename DerivedA::Scalar;
  PairLossTerms<Scalar> terms;
  const Scalar s = cosine_similarity(f_a, f_b, Scalar(1e-12), &terms.degenerate_embedding);
  if (status.y != YStatus::Buffer)
    terms.loss_y = margin_case_loss(s, static_cast<Scalar>(cfg.m1), status.y == YStatus::Neighbor);
  if (status.e == EStatus::Neighbor || status.e == EStatus::NonNeighbor)
    terms.loss_e = margin_case_loss(s, static_cast<Scalar>(cfg.m2), status.e == EStatus::Neighbor);
  terms.combined = terms.loss_y + static_cast<Scalar>(cfg.w) * terms.loss_e;
  return terms;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct PairSample {
  Index a = 0;
  Index b = 0;
  PairStatus status;
};

struct PairBatch {
  std::vector<PairSample> pairs;
  std::uint64_t seed = 0;
};

struct PairSamplingOptions {
  bool with_replacement = true;   // whether a (a,b) pair may repeat
  bool resample_zero_loss = true; // redraw pairs that carry no loss signal
  int resample_attempts = 10;
};

/// Seeded uniform pair sampling without self-pairs. Zero-loss pairs
/// (buffer Y with buffer/excluded E) are redrawn up to the attempt cap
/// so degenerate data cannot stall sampling forever.
template <typename Scalar>
PairBatch sample_pairs(const MatrixX<Scalar>& y, const MatrixX<Scalar>& e, Index count,
                       const PairLossConfig& cfg, std::uint64_t seed,
                       const PairSamplingOptions& options = {}) {
  cfg.validate();
  const Index n = y.rows();
  if (count < 1) throw std::invalid_argument("sample_pairs: count must be >= 1");
  if (n < 2 || e.rows() != n) throw std::invalid_argument("sample_pairs: need >= 2 aligned rows");
  if (!options.with_replacement && count > n * (n - 1) / 2)
    throw std::invalid_argument("sample_pairs: not enough distinct pairs without replacement");

  Rng rng(seed);
  std::set<std::pair<Index, Index>> used;
  PairBatch batch;
  batch.seed = seed;
  batch.pairs.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    PairSample sample;
    for (int attempt = 0;; ++attempt) {
      sample.a = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
      sample.b = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
      if (sample.a == sample.b) continue;
      const auto key = std::minmax(sample.a, sample.b);
      if (!options.with_replacement && used.count(key)) continue;
      sample.status = pair_status(y.row(sample.a), y.row(sample.b), e.row(sample.a), e.row(sample.b), cfg);
      if (options.resample_zero_loss && sample.status.zero_loss() && attempt < options.resample_attempts)
        continue;
      if (!options.with_replacement) used.insert(key);
      break;
    }
    batch.pairs.push_back(sample);
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Embedding training
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
Scalar margin_case_dloss_dcos(Scalar cos_sim, Scalar margin, bool neighbor) {
  if (neighbor) return Scalar(-1);
  return cos_sim > margin ? Scalar(1) : Scalar(0);
}

}  // namespace detail

/// Mean selected pair loss over `pairs`, with exact gradients for all
/// trunk parameters (heads receive zero gradient; the loss never sees
/// them). Gradient flows through both embeddings of each pair.
template <typename Scalar>
std::pair<Scalar, NetworkGradients<Scalar>> pair_loss_and_gradients(
    const Network<Scalar>& net, const MatrixX<Scalar>& x, const std::vector<PairSample>& pairs,
    const PairLossConfig& cfg, PairLossMode mode) {
  if (pairs.empty()) throw std::invalid_argument("pair_loss_and_gradients: empty pair batch");
  const auto m = static_cast<Index>(pairs.size());
  MatrixX<Scalar> xa(m, x.cols()), xb(m, x.cols());
  for (Index i = 0; i < m; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    if (p.a < 0 || p.a >= x.rows() || p.b < 0 || p.b >= x.rows() || p.a == p.b)
      throw std::out_of_range("pair_loss_and_gradients: pair index out of range");
    xa.row(i) = x.row(p.a);
    xb.row(i) = x.row(p.b);
  }

  const ForwardTrace<Scalar> ta = forward_batch(net, xa);
  const ForwardTrace<Scalar> tb = forward_batch(net, xb);

  const Scalar eps(1e-12);
  const Scalar inv_m = Scalar(1) / static_cast<Scalar>(m);
  Scalar total = 0;
  MatrixX<Scalar> d_fa = MatrixX<Scalar>::Zero(m, net.embedding_width());
  MatrixX<Scalar> d_fb = MatrixX<Scalar>::Zero(m, net.embedding_width());
  for (Index i = 0; i < m; ++i) {
    const auto& status = pairs[static_cast<std::size_t>(i)].status;
    const auto fa = ta.embedding.row(i);
    const auto fb = tb.embedding.row(i);
    const Scalar na = std::max(fa.norm(), eps);
    const Scalar nb = std::max(fb.norm(), eps);
    const Scalar s = fa.dot(fb) / (na * nb);

    Scalar loss = 0, dls = 0;
    if (mode != PairLossMode::SimilarityE && status.y != YStatus::Buffer) {
      loss += margin_case_loss(s, static_cast<Scalar>(cfg.m1), status.y == YStatus::Neighbor);
      dls += detail::margin_case_dloss_dcos(s, static_cast<Scalar>(cfg.m1), status.y == YStatus::Neighbor);
    }
    if (mode != PairLossMode::SimilarityY &&
        (status.e == EStatus::Neighbor || status.e == EStatus::NonNeighbor)) {
      const Scalar we = mode == PairLossMode::Joint ? static_cast<Scalar>(cfg.w) : Scalar(1);
      loss += we * margin_case_loss(s, static_cast<Scalar>(cfg.m2), status.e == EStatus::Neighbor);
      dls += we * detail::margin_case_dloss_dcos(s, static_cast<Scalar>(cfg.m2), status.e == EStatus::Neighbor);
    }
    total += loss;
    if (dls != Scalar(0)) {
      const Scalar scale = dls * inv_m;
      d_fa.row(i) = scale * (fb / (na * nb) - (s / (na * na)) * fa);
      d_fb.row(i) = scale * (fa / (na * nb) - (s / (nb * nb)) * fb);
    }
  }
  total *= inv_m;
  if (!std::isfinite(static_cast<double>(total)))
    throw std::runtime_error("pair_loss_and_gradients: non-finite loss");

  NetworkGradients<Scalar> g = NetworkGradients<Scalar>::zeros_like(net);
  backprop_embedding(net, ta, std::move(d_fa), g);
  backprop_embedding(net, tb, std::move(d_fb), g);
  return {total, std::move(g)};
}

/// SGD on the trunk driven by the selected pairwise loss. Deterministic
/// per config seed; heads are left untouched.
template <typename Scalar>
TrainResult<Scalar> train_embedding(Network<Scalar> net, const MatrixX<Scalar>& x, const PairBatch& batch,
                                    const TrainConfig& config, const PairLossConfig& cfg,
                                    PairLossMode mode = PairLossMode::Joint) {
  config.validate(net.hidden.size(), net.heads.size());
  cfg.validate();
  if (net.hidden.empty()) throw std::invalid_argument("train_embedding: network has no embedding layer");
  const auto n_pairs = static_cast<Index>(batch.pairs.size());
  if (n_pairs == 0) throw std::invalid_argument("train_embedding: empty pair batch");

  TrainResult<Scalar> result;
  result.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
  Rng rng(config.seed);
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<Index> order = permutation(n_pairs, rng, config.shuffle);
    Scalar epoch_loss = 0;
    for (Index begin = 0; begin < n_pairs; begin += config.batch_size) {
      const Index count = std::min(config.batch_size, n_pairs - begin);
      std::vector<PairSample> minibatch;
      minibatch.reserve(static_cast<std::size_t>(count));
      for (Index i = 0; i < count; ++i)
        minibatch.push_back(batch.pairs[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + i)])]);
      auto [loss, grads] = pair_loss_and_gradients(net, x, minibatch, cfg, mode);
      if (!std::isfinite(static_cast<double>(loss))) {
        std::ostringstream msg;
        msg << "train_embedding diverged at epoch " << epoch << ", batch offset " << begin;
        throw std::runtime_error(msg.str());
      }
      apply_gradients(net, grads, config);
      epoch_loss += loss * static_cast<Scalar>(count);
    }
    if (!net.all_finite()) {
      std::ostringstream msg;
      msg << "train_embedding diverged: non-finite parameters after epoch " << epoch;
      throw std::runtime_error(msg.str());
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<Scalar>(n_pairs));
  }
  result.net = std::move(net);
  return result;
}

}  // namespace ted

#endif  // TED_PAIRLOSS_HPP
