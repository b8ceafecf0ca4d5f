#ifndef TED_KNN_HPP
#define TED_KNN_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ted/dataset.hpp"
#include "ted/types.hpp"

// Exact cosine-distance nearest neighbor search over stored training
// embeddings, with Gaussian-kernel weighted prediction. The returned
// neighbors are the prediction's evidence.

namespace ted {

template <typename Scalar>
struct EmbeddingIndex {
  MatrixX<Scalar> embeddings;  // rows unit-normalized at build time
  MatrixX<Scalar> labels;
  MatrixX<Scalar> explanations;
  std::vector<std::string> ids;
  SpaceDescriptor label_space;
  SpaceDescriptor explanation_space;

  Index size() const { return embeddings.rows(); }
};

struct KnnConfig {
  Index k = 5;
  bool adaptive_sigma = true;  // mean neighbor distance, floored at 1e-6
  double sigma = 1.0;          // used when adaptive_sigma is false

  void validate() const {
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (!adaptive_sigma && !(sigma > 0)) throw std::invalid_argument("knn: fixed sigma must be positive");
  }
};

template <typename Scalar>
struct Neighbor {
  Index row = 0;
  Scalar distance = 0;
};

template <typename Scalar>
struct Evidence {
  Index row = 0;
  std::string id;
  Scalar distance = 0;
  Scalar weight = 0;
};

template <typename Scalar>
struct KnnPrediction {
  VectorX<Scalar> label;
  VectorX<Scalar> explanation;
  std::vector<Evidence<Scalar>> evidence;
  bool uniform_weight_fallback = false;  // kernel underflowed to all zeros
  bool clamped_k = false;                // requested k exceeded the index size
};

/// Builds an immutable index; rows are normalized on insertion and a
/// zero-norm row is an error naming the offending id.
template <typename Scalar>
EmbeddingIndex<Scalar> build_index(MatrixX<Scalar> embeddings, MatrixX<Scalar> labels,
                                   MatrixX<Scalar> explanations, std::vector<std::string> ids,
                                   SpaceDescriptor label_space, SpaceDescriptor explanation_space) {
  const Index n = embeddings.rows();
  if (n == 0) throw std::invalid_argument("build_index: empty embedding matrix");
  if (labels.rows() != n || explanations.rows() != n)
    throw std::invalid_argument("build_index: payload row counts must match embedding rows");
  if (ids.empty()) {
    ids.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  } else if (static_cast<Index>(ids.size()) != n) {
    throw std::invalid_argument("build_index: id count must match embedding rows");
  }
  for (Index i = 0; i < n; ++i) {
    const Scalar norm = embeddings.row(i).norm();
    if (!(norm > 0))
      throw std::invalid_argument("build_index: zero-norm embedding for row id '" +
                                  ids[static_cast<std::size_t>(i)] + "'");
    embeddings.row(i) /= norm;
  }
  EmbeddingIndex<Scalar> idx;
  idx.embeddings = std::move(embeddings);
  idx.labels = std::move(labels);
  idx.explanations = std::move(explanations);
  idx.ids = std::move(ids);
  idx.label_space = std::move(label_space);
  idx.explanation_space = std::move(explanation_space);
  return idx;
}

/// Exact scan under cosine distance 1 - cos(q, row), ascending, ties
/// broken by ascending row index. Returns min(k, n) neighbors.
template <typename Scalar>
std::vector<Neighbor<Scalar>> query_neighbors(const EmbeddingIndex<Scalar>& idx, const VectorX<Scalar>& query,
                                              Index k) {
  if (k < 1) throw std::invalid_argument("query_neighbors: k must be >= 1");
  if (query.size() != idx.embeddings.cols())
    throw std::invalid_argument("query_neighbors: query dimension mismatch");
  const Scalar qnorm = query.norm();
  if (!(qnorm > 0)) throw std::invalid_argument("query_neighbors: zero query vector");

  const VectorX<Scalar> unit = query / qnorm;
  const VectorX<Scalar> distances = (Scalar(1) - (idx.embeddings * unit).array()).matrix();

  std::vector<Neighbor<Scalar>> all(static_cast<std::size_t>(idx.size()));
  for (Index i = 0; i < idx.size(); ++i) all[static_cast<std::size_t>(i)] = {i, distances(i)};
  const auto take = static_cast<std::size_t>(std::min(k, idx.size()));
  auto by_distance_then_row = [](const Neighbor<Scalar>& a, const Neighbor<Scalar>& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    by_distance_then_row);
  all.resize(take);
  return all;
}

namespace detail {

/// Weighted vote; ties resolved toward the smallest class index.
template <typename Scalar>
Scalar weighted_vote(const MatrixX<Scalar>& payload, const std::vector<Evidence<Scalar>>& evidence,
                     Index cardinality) {
  VectorX<Scalar> tally = VectorX<Scalar>::Zero(cardinality);
  for (const auto& ev : evidence) {
    const auto cls = static_cast<Index>(payload(ev.row, 0));
    tally(cls) += ev.weight;
  }
  Index best = 0;
  for (Index c = 1; c < cardinality; ++c)
    if (tally(c) > tally(best)) best = c;
  return static_cast<Scalar>(best);
}

template <typename Scalar>
VectorX<Scalar> weighted_mean(const MatrixX<Scalar>& payload, const std::vector<Evidence<Scalar>>& evidence) {
  VectorX<Scalar> mean = VectorX<Scalar>::Zero(payload.cols());
  for (const auto& ev : evidence) mean += ev.weight * payload.row(ev.row).transpose();
  return mean;
}

}  // namespace detail

/// Gaussian-kernel weighted prediction from the k nearest stored
/// embeddings: weights exp(-d^2 / 2 sigma^2), normalized to sum 1;
/// weighted mean for continuous payloads, weighted vote for
/// categorical ones.
template <typename Scalar>
KnnPrediction<Scalar> predict(const EmbeddingIndex<Scalar>& idx, const VectorX<Scalar>& query,
                              const KnnConfig& cfg) {
  cfg.validate();
  KnnPrediction<Scalar> out;
  out.clamped_k = cfg.k > idx.size();
  const std::vector<Neighbor<Scalar>> neighbors = query_neighbors(idx, query, cfg.k);

  Scalar sigma;
  if (cfg.adaptive_sigma) {
    Scalar mean_distance = 0;
    for (const auto& nb : neighbors) mean_distance += nb.distance;
    mean_distance /= static_cast<Scalar>(neighbors.size());
    sigma = std::max(mean_distance, Scalar(1e-6));
  } else {
    sigma = static_cast<Scalar>(cfg.sigma);
  }

  out.evidence.reserve(neighbors.size());
  Scalar total = 0;
  for (const auto& nb : neighbors) {
    Evidence<Scalar> ev;
    ev.row = nb.row;
    ev.id = idx.ids[static_cast<std::size_t>(nb.row)];
    ev.distance = nb.distance;
    ev.weight = std::exp(-(nb.distance * nb.distance) / (Scalar(2) * sigma * sigma));
    total += ev.weight;
    out.evidence.push_back(std::move(ev));
  }
  if (total > 0) {
    for (auto& ev : out.evidence) ev.weight /= total;
  } else {
    out.uniform_weight_fallback = true;
    const Scalar uniform = Scalar(1) / static_cast<Scalar>(out.evidence.size());
    for (auto& ev : out.evidence) ev.weight = uniform;
  }

  if (idx.label_space.is_categorical()) {
    out.label = VectorX<Scalar>::Constant(
        1, detail::weighted_vote(idx.labels, out.evidence, idx.label_space.cardinality));
  } else {
    out.label = detail::weighted_mean(idx.labels, out.evidence);
  }
  if (idx.explanation_space.is_categorical()) {
    out.explanation = VectorX<Scalar>::Constant(
        1, detail::weighted_vote(idx.explanations, out.evidence, idx.explanation_space.cardinality));
  } else {
    out.explanation = detail::weighted_mean(idx.explanations, out.evidence);
  }
  return out;
}

}  // namespace ted

#endif  // TED_KNN_HPP
