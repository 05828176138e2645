#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qrm {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseC = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

} // namespace qrm
