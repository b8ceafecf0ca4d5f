#ifndef TED_SYNTHETIC_HPP
#define TED_SYNTHETIC_HPP

#include <cstdint>

#include "ted/dataset.hpp"

namespace ted {

/// Generator parameters for synthetic tabular triples. Features come
/// from a Gaussian mixture, explanations are a smooth (tanh of linear)
/// function of the features plus noise, and the label is linear in the
/// explanations plus noise — so E is informative for Y by
/// construction.
struct SyntheticSpec {
  Index n = 1000;
  Index feature_dim = 10;
  Index explanation_dim = 4;
  Index clusters = 3;
  double cluster_spread = 3.0;   // stddev of the mixture means
  double within_cluster_noise = 1.0;
  double explanation_noise = 0.05;
  double label_noise = 0.05;

  void validate() const {
    if (n < 1 || feature_dim < 1 || explanation_dim < 1 || clusters < 1)
      throw std::invalid_argument("synthetic spec: counts and dimensions must be >= 1");
    if (within_cluster_noise < 0 || explanation_noise < 0 || label_noise < 0 || cluster_spread < 0)
      throw std::invalid_argument("synthetic spec: noise levels must be nonnegative");
  }
};

TripleDataset generate_synthetic_triples(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace ted

#endif  // TED_SYNTHETIC_HPP
