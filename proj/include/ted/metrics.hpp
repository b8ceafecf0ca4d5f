#ifndef TED_METRICS_HPP
#define TED_METRICS_HPP

#include <optional>
#include <stdexcept>

#include "ted/dataset.hpp"
#include "ted/types.hpp"

namespace ted {

/// Evaluation metrics for one prediction run. Only the fields valid
/// for the run's space kinds are populated: categorical variables get
/// accuracies, continuous ones get MAEs (plus binned variants when a
/// discretizer is supplied). Vector-valued MAEs carry both the
/// per-attribute mean (headline) and the raw attribute sum.
struct MetricsReport {
  std::optional<double> y_accuracy;
  std::optional<double> y_mae_continuous;
  std::optional<double> y_mae_discretized;
  std::optional<double> e_accuracy;
  std::optional<double> e_mae_continuous;
  std::optional<double> e_mae_continuous_sum;
  std::optional<double> e_mae_discretized;
  std::optional<double> e_mae_discretized_sum;
  std::optional<double> ye_joint_accuracy;  // both parts correct; categorical Y and E only
  Index n = 0;
};

/// Fraction of exact matches between two categorical sequences.
template <typename DerivedP, typename DerivedT>
double classification_accuracy(const Eigen::MatrixBase<DerivedP>& pred,
                               const Eigen::MatrixBase<DerivedT>& truth) {
  if (pred.size() != truth.size() || pred.size() == 0)
    throw std::invalid_argument("classification_accuracy: sequences must share a positive length");
  Index hits = 0;
  for (Index i = 0; i < pred.size(); ++i)
    if (pred(i) == truth(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

struct MaeValue {
  double per_attribute = 0;  // mean per-instance l1 distance / attribute count
  double raw_sum = 0;        // mean per-instance l1 distance
};

template <typename DerivedP, typename DerivedT>
MaeValue mae_continuous(const Eigen::MatrixBase<DerivedP>& pred, const Eigen::MatrixBase<DerivedT>& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw std::invalid_argument("mae_continuous: shape mismatch");
  if (pred.rows() == 0) throw std::invalid_argument("mae_continuous: empty input");
  MaeValue v;
  v.raw_sum = (pred - truth).cwiseAbs().rowwise().sum().mean();
  v.per_attribute = v.raw_sum / static_cast<double>(pred.cols());
  return v;
}

/// Bins both sides into {-1, 0, 1} first, so opposite extremes count
/// as an error of 2.
template <typename DerivedP, typename DerivedT>
MaeValue mae_discretized(const Eigen::MatrixBase<DerivedP>& pred, const Eigen::MatrixBase<DerivedT>& truth,
                         const Discretizer& d_pred, const Discretizer& d_truth) {
  return mae_continuous(discretize(pred, d_pred), discretize(truth, d_truth));
}

struct Predictions {
  MatrixXd labels;
  MatrixXd explanations;
};

struct EvalSpaces {
  SpaceDescriptor label_space;
  SpaceDescriptor explanation_space;
};

struct EvalDiscretizers {
  std::optional<Discretizer> label;
  std::optional<Discretizer> explanation;
};

MetricsReport evaluate_run(const Predictions& pred, const Predictions& truth, const EvalSpaces& spaces,
                           const EvalDiscretizers& discretizers);

}  // namespace ted

#endif  // TED_METRICS_HPP
