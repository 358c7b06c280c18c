#include "lukcon/linalg.hpp"

namespace lukcon {

namespace {

std::size_t numerical_rank(const Eigen::VectorXd& sv, double tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = tol * sv(0);
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(r)) > cut)
    ++r;
  return r;
}

}  // namespace

NullspaceBasis nullspace(const Eigen::MatrixXd& M, double tol) {
  NullspaceBasis out;
  out.tol = tol;
  const Eigen::Index n = M.cols();
  if (n == 0) {
    out.basis.resize(0, 0);
    return out;
  }
  if (M.rows() == 0) {
    out.basis = Eigen::MatrixXd::Identity(n, n);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  out.rank = numerical_rank(svd.singularValues(), tol);
  const auto r = static_cast<Eigen::Index>(out.rank);
  out.basis = svd.matrixV().rightCols(n - r);
  return out;
}

LeastSquaresResult solve_linear_least_squares(const Eigen::MatrixXd& M,
                                              const Eigen::VectorXd& rhs,
                                              double tol) {
  LeastSquaresResult out;
  out.x = Eigen::VectorXd::Zero(M.cols());
  if (M.rows() == 0 || M.cols() == 0) {
    out.residual = rhs.norm();
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const auto r = static_cast<Eigen::Index>(numerical_rank(sv, tol));
  if (r > 0) {
    const Eigen::VectorXd coeffs =
        (svd.matrixU().leftCols(r).transpose() * rhs).cwiseQuotient(sv.head(r));
    out.x = svd.matrixV().leftCols(r) * coeffs;
  }
  out.residual = (M * out.x - rhs).norm();
  return out;
}

}  // namespace lukcon
