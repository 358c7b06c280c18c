#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace lukcon {

/// minimize ½ x'Qx + c'x  s.t.  A x + b <= 0,  E x = d.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd E;
  Eigen::VectorXd d;

  Eigen::Index variables() const { return Q.rows(); }
};

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd mu;  // one per inequality row, >= 0
  Eigen::VectorXd nu;  // one per equality row
  std::vector<std::size_t> active;  // final working set (inequality rows)
  double stationarity = 0.0;  // ||Qx + c + A'mu + E'nu||_inf
  double feasibility = 0.0;   // max(0, max(Ax+b), max|Ex-d|)
  double slackness = 0.0;     // max |mu_i (A_i x + b_i)|
  int iterations = 0;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iterations = 20000;
};

/// Primal active-set method started from a phase-1 simplex point.
///
/// The blocking constraint with the lowest row index enters on ties, and the
/// lowest-index working constraint with a negative multiplier leaves.
/// Throws InfeasibleError (with the phase-1 value), UnboundedError,
/// IterationLimitError, or InputError on inconsistent dimensions.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& opts = {});

}  // namespace lukcon
