#pragma once

#include <Eigen/Core>

namespace hkgc {

template <typename Scalar>
using TensorT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense row-major 2-D array; the only value type the kernels and rankers use.
using Tensor = TensorT<double>;

}  // namespace hkgc
