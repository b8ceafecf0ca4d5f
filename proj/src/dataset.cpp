#include "ted/dataset.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace ted {

namespace {

void check_categorical_column(const MatrixXd& m, Index cardinality, const char* what) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v != std::floor(v) || v < 0 || v >= static_cast<double>(cardinality)) {
        std::ostringstream msg;
        msg << what << " value " << v << " at row " << i << " outside categorical range [0, " << cardinality << ")";
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        if (!std::isfinite(m(i, j))) {
          std::ostringstream msg;
          msg << "non-finite " << what << " value at row " << i << ", column " << j;
          throw std::invalid_argument(msg.str());
        }
  }
}

}  // namespace

void TripleDataset::validate() const {
  if (labels.rows() != features.rows() || explanations.rows() != features.rows())
    throw std::invalid_argument("features, labels, and explanations must have identical row counts");
  if (!ids.empty() && static_cast<Index>(ids.size()) != features.rows())
    throw std::invalid_argument("id count must match row count");
  check_finite(features, "feature");
  check_finite(labels, "label");
  check_finite(explanations, "explanation");
  if (label_space.is_categorical()) check_categorical_column(labels, label_space.cardinality, "label");
  if (explanation_space.is_categorical())
    check_categorical_column(explanations, explanation_space.cardinality, "explanation");
}

TripleDataset TripleDataset::take(const std::vector<Index>& row_indices) const {
  TripleDataset out;
  out.feature_space = feature_space;
  out.label_space = label_space;
  out.explanation_space = explanation_space;
  const Index n = static_cast<Index>(row_indices.size());
  out.features.resize(n, features.cols());
  out.labels.resize(n, labels.cols());
  out.explanations.resize(n, explanations.cols());
  out.ids.reserve(ids.empty() ? 0 : row_indices.size());
  for (Index i = 0; i < n; ++i) {
    const Index r = row_indices[static_cast<std::size_t>(i)];
    if (r < 0 || r >= rows()) throw std::out_of_range("take: row index out of range");
    out.features.row(i) = features.row(r);
    out.labels.row(i) = labels.row(r);
    out.explanations.row(i) = explanations.row(r);
    if (!ids.empty()) out.ids.push_back(ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

TripleDataset transform_log_offset(const TripleDataset& ds) {
  TripleDataset out = ds;
  for (Index i = 0; i < out.features.rows(); ++i)
    for (Index j = 0; j < out.features.cols(); ++j) {
      const double x = out.features(i, j);
      if (x <= -100.0) {
        std::ostringstream msg;
        msg << "log-offset transform undefined for feature " << x << " at row " << i << ", column " << j
            << " (requires x > -100)";
        throw std::domain_error(msg.str());
      }
      out.features(i, j) = std::log10(100.0 + x);
    }
  return out;
}

std::pair<TripleDataset, FeatureStats> standardize(const TripleDataset& ds,
                                                   const std::optional<FeatureStats>& stats) {
  const Index n = ds.rows();
  const Index p = ds.features.cols();
  FeatureStats used;
  if (stats.has_value()) {
    used = *stats;
    if (used.mean.size() != p || used.stddev.size() != p)
      throw std::invalid_argument("standardize: supplied stats do not match feature count");
  } else {
    if (n == 0) throw std::invalid_argument("standardize: cannot compute stats from an empty dataset");
    used.mean = ds.features.colwise().mean();
    MatrixXd centered = ds.features.rowwise() - used.mean.transpose();
    used.stddev = (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  }
  TripleDataset out = ds;
  for (Index j = 0; j < p; ++j) {
    const double sd = used.stddev(j);
    if (sd > 0.0)
      out.features.col(j) = (ds.features.col(j).array() - used.mean(j)) / sd;
    else
      out.features.col(j).setZero();  // constant column
  }
  return {std::move(out), std::move(used)};
}

SplitResult split(const TripleDataset& ds, const SplitSpec& spec) {
  spec.validate();
  const Index n = ds.rows();
  const Index n_val = static_cast<Index>(std::floor(spec.validation_fraction * static_cast<double>(n)));
  const Index n_test = static_cast<Index>(std::floor(spec.test_fraction * static_cast<double>(n)));
  const Index n_train = n - n_val - n_test;

  Rng rng(spec.seed);
  std::vector<Index> order = permutation(n, rng);

  auto slice = [&](Index begin, Index count) {
    std::vector<Index> idx(order.begin() + begin, order.begin() + begin + count);
    std::sort(idx.begin(), idx.end());  // preserve original row order within a partition
    return ds.take(idx);
  };

  SplitResult result;
  result.train = slice(0, n_train);
  result.validation = slice(n_train, n_val);
  result.test = slice(n_train + n_val, n_test);
  return result;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty data");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Discretizer quantile_thresholds(const std::vector<double>& values, bool* degenerate) {
  if (values.size() < 3) throw std::invalid_argument("quantile thresholds need at least 3 values");
  const double low = quantile(values, 1.0 / 3.0);
  const double high = quantile(values, 2.0 / 3.0);
  if (degenerate) *degenerate = !(low < high);
  return Discretizer(low, high);
}

}  // namespace ted
