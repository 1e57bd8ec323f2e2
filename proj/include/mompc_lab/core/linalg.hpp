#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mompc_lab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpTriplet = Eigen::Triplet<double>;

}  // namespace mompc_lab
