#include "ted/metrics.hpp"

namespace ted {

MetricsReport evaluate_run(const Predictions& pred, const Predictions& truth, const EvalSpaces& spaces,
                           const EvalDiscretizers& discretizers) {
  const bool has_y = pred.labels.rows() > 0;
  const bool has_e = pred.explanations.rows() > 0;
  if (!has_y && !has_e) throw std::invalid_argument("evaluate_run: empty prediction set");
  if (has_y && has_e && pred.labels.rows() != pred.explanations.rows())
    throw std::invalid_argument("evaluate_run: label/explanation prediction row counts differ");
  if (has_y && pred.labels.rows() != truth.labels.rows())
    throw std::invalid_argument("evaluate_run: label prediction/ground-truth row counts differ");
  if (has_e && pred.explanations.rows() != truth.explanations.rows())
    throw std::invalid_argument("evaluate_run: explanation prediction/ground-truth row counts differ");

  MetricsReport report;
  report.n = has_y ? pred.labels.rows() : pred.explanations.rows();

  if (has_y) {
    if (spaces.label_space.is_categorical()) {
      report.y_accuracy = classification_accuracy(pred.labels.col(0), truth.labels.col(0));
    } else {
      if (pred.labels.cols() != truth.labels.cols())
        throw std::invalid_argument("evaluate_run: label shape mismatch");
      report.y_mae_continuous = mae_continuous(pred.labels, truth.labels).per_attribute;
      if (discretizers.label) {
        const MatrixXd bp = discretize(pred.labels, *discretizers.label);
        const MatrixXd bt = discretize(truth.labels, *discretizers.label);
        report.y_mae_discretized = mae_continuous(bp, bt).per_attribute;
        // 0-1 error on the binned values is the conventional accuracy.
        report.y_accuracy = classification_accuracy(bp.col(0), bt.col(0));
      }
    }
  }

  if (has_e) {
    if (spaces.explanation_space.is_categorical()) {
      report.e_accuracy = classification_accuracy(pred.explanations.col(0), truth.explanations.col(0));
    } else {
      if (pred.explanations.cols() != truth.explanations.cols())
        throw std::invalid_argument("evaluate_run: explanation shape mismatch");
      const MaeValue cont = mae_continuous(pred.explanations, truth.explanations);
      report.e_mae_continuous = cont.per_attribute;
      report.e_mae_continuous_sum = cont.raw_sum;
      if (discretizers.explanation) {
        const MaeValue disc = mae_discretized(pred.explanations, truth.explanations,
                                              *discretizers.explanation, *discretizers.explanation);
        report.e_mae_discretized = disc.per_attribute;
        report.e_mae_discretized_sum = disc.raw_sum;
      }
    }
  }

  if (has_y && has_e && spaces.label_space.is_categorical() && spaces.explanation_space.is_categorical()) {
    Index hits = 0;
    for (Index i = 0; i < report.n; ++i)
      if (pred.labels(i, 0) == truth.labels(i, 0) && pred.explanations(i, 0) == truth.explanations(i, 0))
        ++hits;
    report.ye_joint_accuracy = static_cast<double>(hits) / static_cast<double>(report.n);
  }
  return report;
}

}  // namespace ted
