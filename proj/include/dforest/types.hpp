#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dforest {

/// Largest supported dimension. Vectors and frames use fixed-capacity Eigen
/// storage so hot loops never touch the heap.
inline constexpr int kMaxDim = 8;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Vec = VectorX<double>;
using Mat = MatrixX<double>;
using Point = Vec;

/// Raised when an argument violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// The periodic window is too small for the requested box or scale.
class WindowTooSmall : public PreconditionError {
 public:
  explicit WindowTooSmall(const std::string& what) : PreconditionError(what) {}
};

}  // namespace dforest
