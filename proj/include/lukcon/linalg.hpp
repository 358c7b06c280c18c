#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace lukcon {

/// Orthonormal basis of Ker(M), one vector per column of `basis`.
struct NullspaceBasis {
  Eigen::MatrixXd basis;  // N x n
  std::size_t rank = 0;
  double tol = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
};

/// Singular values <= tol * sigma_max count as zero.
NullspaceBasis nullspace(const Eigen::MatrixXd& M, double tol = 1e-10);

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||M x - rhs||_2
};

/// Minimum-norm minimiser of ||M x - rhs|| via the SVD pseudo-inverse.
LeastSquaresResult solve_linear_least_squares(const Eigen::MatrixXd& M,
                                              const Eigen::VectorXd& rhs,
                                              double tol = 1e-10);

}  // namespace lukcon
