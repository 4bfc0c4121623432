#pragma once

#include <complex>

#include <Eigen/Core>

namespace dwelltime {

using Complex = std::complex<double>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Which one-sided limit to take at a point where the potential jumps.
enum class Side { below, above };

}  // namespace dwelltime
