#pragma once

#include <Eigen/Dense>

namespace conbatch {

// Row-major layouts keep per-sample rows contiguous, matching the on-disk
// blob order and making per-row views cheap.
using MatrixXdR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixXfR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace conbatch
