#pragma once

#include <Eigen/Dense>

namespace setonet {

// Row-major so that a batch of items is a contiguous block of rows.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

}  // namespace setonet
