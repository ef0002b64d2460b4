#pragma once

#include <Eigen/Dense>

namespace jdsn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace jdsn
