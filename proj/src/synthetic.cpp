#include "ted/synthetic.hpp"

#include <cmath>

#include "ted/rng.hpp"

namespace ted {

TripleDataset generate_synthetic_triples(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  auto gaussian_matrix = [&rng](Index rows, Index cols, double scale) {
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = scale * normal_unit(rng);
    return m;
  };

  const MatrixXd centers = gaussian_matrix(spec.clusters, spec.feature_dim, spec.cluster_spread);
  const MatrixXd mixing =
      gaussian_matrix(spec.explanation_dim, spec.feature_dim, 1.0 / std::sqrt(static_cast<double>(spec.feature_dim)));
  const VectorXd label_weights = gaussian_matrix(spec.explanation_dim, 1, 1.0);
  const double label_intercept = normal_unit(rng);

  TripleDataset ds;
  ds.features.resize(spec.n, spec.feature_dim);
  ds.labels.resize(spec.n, 1);
  ds.explanations.resize(spec.n, spec.explanation_dim);
  ds.ids.reserve(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    const Index cluster = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(spec.clusters)));
    for (Index j = 0; j < spec.feature_dim; ++j)
      ds.features(i, j) = centers(cluster, j) + spec.within_cluster_noise * normal_unit(rng);
    const VectorXd smooth = (mixing * ds.features.row(i).transpose()).array().tanh();
    for (Index j = 0; j < spec.explanation_dim; ++j)
      ds.explanations(i, j) = smooth(j) + spec.explanation_noise * normal_unit(rng);
    ds.labels(i, 0) = label_weights.dot(ds.explanations.row(i).transpose()) + label_intercept +
                      spec.label_noise * normal_unit(rng);
    ds.ids.push_back(std::to_string(i));
  }

  ds.feature_space = SpaceDescriptor::continuous_vector(spec.feature_dim);
  ds.label_space = SpaceDescriptor::continuous_scalar("y");
  ds.explanation_space = spec.explanation_dim == 1
                             ? SpaceDescriptor::continuous_scalar("e0")
                             : SpaceDescriptor::continuous_vector(spec.explanation_dim);
  ds.validate();
  return ds;
}

}  // namespace ted
