#ifndef TED_LINEAR_HPP
#define TED_LINEAR_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ted/types.hpp"

// Linear least squares with sparsity penalties, solved by proximal
// gradient (ISTA) with backtracking line search. One solver covers the
// elementwise l1 penalty and the row-grouped l21 penalty.

namespace ted {

enum class PenaltyKind { Lasso, RowGroupL21 };

/// Elementwise soft threshold: sign(x) * max(|x| - t, 0).
template <typename Derived>
MatrixX<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& x,
                                                 typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([t](Scalar v) {
    const Scalar shrunk = std::abs(v) - t;
    return shrunk > Scalar(0) ? (v > Scalar(0) ? shrunk : -shrunk) : Scalar(0);
  });
}

/// Row-wise group shrinkage: row * max(1 - t / ||row||_2, 0).
template <typename Derived>
MatrixX<typename Derived::Scalar> row_shrink(const Eigen::MatrixBase<Derived>& x,
                                             typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out = x;
  for (Index r = 0; r < out.rows(); ++r) {
    const Scalar norm = out.row(r).norm();
    out.row(r) *= norm > t ? (Scalar(1) - t / norm) : Scalar(0);
  }
  return out;
}

template <typename Scalar>
Scalar penalty_value(const MatrixX<Scalar>& coeffs, PenaltyKind kind) {
  if (kind == PenaltyKind::Lasso) return coeffs.cwiseAbs().sum();
  Scalar sum = 0;
  for (Index r = 0; r < coeffs.rows(); ++r) sum += coeffs.row(r).norm();
  return sum;
}

template <typename Scalar>
struct LinearModel {
  MatrixX<Scalar> coefficients;  // features x outputs
  VectorX<Scalar> intercepts;    // outputs
  PenaltyKind penalty = PenaltyKind::Lasso;
  Scalar alpha = 0;
  bool converged = true;
  Index iterations = 0;

  MatrixX<Scalar> predict(const MatrixX<Scalar>& x) const {
    if (x.cols() != coefficients.rows())
      throw std::invalid_argument("linear predict: feature count mismatch");
    return (x * coefficients).rowwise() + intercepts.transpose();
  }
};

/// Minimizes (1/2n) ||X B + 1 c' - Y||_F^2 + alpha * penalty(B) with an
/// unpenalized intercept (handled by centering). Returns the best
/// iterate with converged = false when the iteration cap is hit before
/// the relative objective change drops below `tolerance`.
template <typename Scalar>
LinearModel<Scalar> fit_penalized_least_squares(const MatrixX<Scalar>& x, const MatrixX<Scalar>& y,
                                                Scalar alpha, PenaltyKind kind, Index max_iterations = 5000,
                                                Scalar tolerance = Scalar(1e-8)) {
  if (x.rows() == 0 || x.rows() != y.rows())
    throw std::invalid_argument("fit: X and Y must share a positive row count");
  if (alpha < 0) throw std::invalid_argument("fit: alpha must be nonnegative");
  const Index n = x.rows();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  const RowVectorX<Scalar> x_mean = x.colwise().mean();
  const RowVectorX<Scalar> y_mean = y.colwise().mean();
  const MatrixX<Scalar> xc = x.rowwise() - x_mean;
  const MatrixX<Scalar> yc = y.rowwise() - y_mean;

  auto fit_value = [&](const MatrixX<Scalar>& b) { return (xc * b - yc).squaredNorm() * inv_n / Scalar(2); };
  auto prox = [&](const MatrixX<Scalar>& b, Scalar t) {
    return kind == PenaltyKind::Lasso ? soft_threshold(b, t * alpha) : row_shrink(b, t * alpha);
  };

  MatrixX<Scalar> b = MatrixX<Scalar>::Zero(x.cols(), y.cols());
  Scalar objective = fit_value(b) + alpha * penalty_value(b, kind);
  Scalar step = Scalar(1);
  bool converged = false;
  Index iter = 0;
  for (; iter < max_iterations; ++iter) {
    const MatrixX<Scalar> residual = xc * b - yc;
    const Scalar f_b = residual.squaredNorm() * inv_n / Scalar(2);
    const MatrixX<Scalar> grad = xc.transpose() * residual * inv_n;

    MatrixX<Scalar> z;
    for (;;) {
      z = prox(b - step * grad, step);
      const MatrixX<Scalar> delta = z - b;
      const Scalar quad = f_b + (grad.array() * delta.array()).sum() + delta.squaredNorm() / (Scalar(2) * step);
      if (fit_value(z) <= quad + Scalar(1e-15)) break;
      step /= Scalar(2);
      if (step < Scalar(1e-18)) break;  // step underflow: keep last candidate
    }
    b = std::move(z);

    const Scalar next_objective = fit_value(b) + alpha * penalty_value(b, kind);
    const Scalar change = std::abs(objective - next_objective) / std::max(Scalar(1), std::abs(objective));
    objective = next_objective;
    if (change < tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }

  LinearModel<Scalar> model;
  model.coefficients = std::move(b);
  model.intercepts = (y_mean - x_mean * model.coefficients).transpose();
  model.penalty = kind;
  model.alpha = alpha;
  model.converged = converged;
  model.iterations = iter;
  return model;
}

template <typename Scalar>
LinearModel<Scalar> fit_lasso(const MatrixX<Scalar>& x, const VectorX<Scalar>& y, Scalar alpha,
                              Index max_iterations = 5000, Scalar tolerance = Scalar(1e-8)) {
  return fit_penalized_least_squares<Scalar>(x, y, alpha, PenaltyKind::Lasso, max_iterations, tolerance);
}

/// Multi-output fit with the l21 penalty (sum of row norms of the
/// coefficient matrix); drives entire feature rows to zero.
template <typename Scalar>
LinearModel<Scalar> fit_multitask_l21(const MatrixX<Scalar>& x, const MatrixX<Scalar>& y, Scalar alpha,
                                      Index max_iterations = 5000, Scalar tolerance = Scalar(1e-8)) {
  return fit_penalized_least_squares<Scalar>(x, y, alpha, PenaltyKind::RowGroupL21, max_iterations, tolerance);
}

}  // namespace ted

#endif  // TED_LINEAR_HPP
