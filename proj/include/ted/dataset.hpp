#ifndef TED_DATASET_HPP
#define TED_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ted/rng.hpp"
#include "ted/types.hpp"

namespace ted {

enum class SpaceKind { ContinuousScalar, ContinuousVector, Categorical };

/// Describes one of the X/Y/E value spaces of a triple dataset.
struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::ContinuousScalar;
  Index dim = 1;          // columns occupied (1 unless ContinuousVector)
  Index cardinality = 0;  // number of classes when Categorical
  std::vector<std::string> names;

  static SpaceDescriptor continuous_scalar(std::string name = {}) {
    SpaceDescriptor s;
    s.kind = SpaceKind::ContinuousScalar;
    if (!name.empty()) s.names = {std::move(name)};
    return s;
  }
  static SpaceDescriptor continuous_vector(Index dim, std::vector<std::string> names = {}) {
    if (dim < 1) throw std::invalid_argument("continuous-vector dimension must be >= 1");
    SpaceDescriptor s;
    s.kind = SpaceKind::ContinuousVector;
    s.dim = dim;
    s.names = std::move(names);
    return s;
  }
  static SpaceDescriptor categorical(Index cardinality, std::string name = {}) {
    if (cardinality < 2) throw std::invalid_argument("categorical cardinality must be >= 2");
    SpaceDescriptor s;
    s.kind = SpaceKind::Categorical;
    s.cardinality = cardinality;
    if (!name.empty()) s.names = {std::move(name)};
    return s;
  }

  bool is_categorical() const { return kind == SpaceKind::Categorical; }
  bool is_continuous() const { return kind != SpaceKind::Categorical; }
};

/// Aligned (features, labels, explanations) with per-space descriptors.
/// Rows are instances. Immutable by convention: operations return copies.
struct TripleDataset {
  MatrixXd features;
  MatrixXd labels;
  MatrixXd explanations;
  std::vector<std::string> ids;
  SpaceDescriptor feature_space;
  SpaceDescriptor label_space;
  SpaceDescriptor explanation_space;

  Index rows() const { return features.rows(); }

  /// Checks row alignment, finiteness, and categorical ranges.
  void validate() const;

  /// Row subset in the given order.
  TripleDataset take(const std::vector<Index>& row_indices) const;
};

/// Two-threshold ternary binning into {-1, 0, 1}. Values equal to a
/// threshold fall in the middle bin, keeping the map total and monotone.
struct Discretizer {
  double low = 0.0;
  double high = 0.0;

  Discretizer() = default;
  Discretizer(double low_, double high_) : low(low_), high(high_) {
    if (!(low <= high) || !std::isfinite(low) || !std::isfinite(high))
      throw std::invalid_argument("discretizer requires finite low <= high");
  }

  double apply(double v) const { return v < low ? -1.0 : (v > high ? 1.0 : 0.0); }
};

struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    if (train_fraction < 0 || validation_fraction < 0 || test_fraction < 0)
      throw std::invalid_argument("split fractions must be nonnegative");
    const double sum = train_fraction + validation_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("split fractions must sum to 1");
  }
};

struct SplitResult {
  TripleDataset train;
  TripleDataset validation;
  TripleDataset test;
};

/// Per-feature-column standardization statistics.
struct FeatureStats {
  VectorXd mean;
  VectorXd stddev;  // population stddev; zero for constant columns
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Replaces every feature cell x by log10(100 + x). Labels and
/// explanations are untouched. Throws on x <= -100.
TripleDataset transform_log_offset(const TripleDataset& ds);

/// Standardizes feature columns to zero mean / unit variance. When
/// `stats` is absent they are computed from `ds` (training role);
/// otherwise applied verbatim (validation/test role). Constant columns
/// map to all-zeros.
std::pair<TripleDataset, FeatureStats> standardize(const TripleDataset& ds,
                                                   const std::optional<FeatureStats>& stats = std::nullopt);

/// Deterministic seeded partition. Validation and test take
/// floor(fraction * n) rows each; the remainder goes to train. Row
/// order within each partition follows the original dataset.
SplitResult split(const TripleDataset& ds, const SplitSpec& spec);

/// Elementwise ternary binning.
template <typename Derived>
MatrixX<typename Derived::Scalar> discretize(const Eigen::MatrixBase<Derived>& values, const Discretizer& d) {
  return values.unaryExpr([&d](typename Derived::Scalar v) {
    return static_cast<typename Derived::Scalar>(d.apply(static_cast<double>(v)));
  });
}

inline std::vector<double> discretize(const std::vector<double>& values, const Discretizer& d) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&d](double v) { return d.apply(v); });
  return out;
}

/// Type-7 (linear interpolation) empirical quantile of unsorted data.
double quantile(std::vector<double> values, double p);

/// Discretizer at the empirical 1/3 and 2/3 quantiles. Needs >= 3
/// values. `degenerate`, when given, is set when the two thresholds
/// coincide (heavily tied data).
Discretizer quantile_thresholds(const std::vector<double>& values, bool* degenerate = nullptr);

/// Joint class code over the Y x E product space: y * ne + e.
inline Index cartesian_encode(Index y, Index e, Index ny, Index ne) {
  if (ny < 1 || ne < 1) throw std::invalid_argument("cartesian_encode: empty product space");
  if (y < 0 || y >= ny) throw std::out_of_range("cartesian_encode: y out of range");
  if (e < 0 || e >= ne) throw std::out_of_range("cartesian_encode: e out of range");
  return y * ne + e;
}

inline std::pair<Index, Index> cartesian_decode(Index code, Index ny, Index ne) {
  if (ny < 1 || ne < 1) throw std::invalid_argument("cartesian_decode: empty product space");
  if (code < 0 || code >= ny * ne) throw std::out_of_range("cartesian_decode: code out of range");
  return {code / ne, code % ne};
}

}  // namespace ted

#endif  // TED_DATASET_HPP
