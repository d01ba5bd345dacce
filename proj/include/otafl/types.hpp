#pragma once

#include <complex>

#include <Eigen/Dense>

namespace otafl {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

}  // namespace otafl
