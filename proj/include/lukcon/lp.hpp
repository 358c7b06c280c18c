#pragma once

#include <optional>

#include <Eigen/Dense>

namespace lukcon {

/// minimize objective·x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,
/// lower <= x <= upper (entries may be ±infinity).
///
/// Empty `lower` / `upper` mean unbounded in that direction. Empty constraint
/// matrices are allowed; their column count must then still match when
/// non-empty.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  explicit LinearProgram(Eigen::Index variables = 0)
      : objective(Eigen::VectorXd::Zero(variables)),
        A_ub(0, variables),
        A_eq(0, variables) {}

  Eigen::Index variables() const { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Optimum of the phase-1 problem (sum of artificial variables).
  double phase_one_value = 0.0;
  int iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;  // phase-1 optimum above this => infeasible
  int max_iterations = 20000;
};

/// Dense two-phase primal simplex with Bland's rule. Throws
/// IterationLimitError when the cap is hit and InputError on dimension
/// mismatches.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts = {});

/// Some t with E t = d and G t <= g (t free), or nullopt when phase 1 proves
/// the system infeasible.
std::optional<Eigen::VectorXd> lp_feasible(const Eigen::MatrixXd& E,
                                           const Eigen::VectorXd& d,
                                           const Eigen::MatrixXd& G,
                                           const Eigen::VectorXd& g,
                                           const LpOptions& opts = {});

}  // namespace lukcon
