#ifndef TED_TYPES_HPP
#define TED_TYPES_HPP

#include <Eigen/Core>

namespace ted {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;
using VectorXi = Eigen::Matrix<int, Eigen::Dynamic, 1>;

}  // namespace ted

#endif  // TED_TYPES_HPP
