#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace fsgad {

// Row-major 64-bit dense matrices everywhere. Row-major matches the on-disk
// feature layout and keeps per-node rows contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

using NodeId = std::int32_t;

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

inline Matrix scalar_matrix(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace fsgad
