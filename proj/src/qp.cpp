#include "lukcon/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lukcon/errors.hpp"
#include "lukcon/linalg.hpp"
#include "lukcon/lp.hpp"

namespace lukcon {

namespace {

void check_dims(const QpProblem& p) {
  const Eigen::Index n = p.Q.rows();
  auto bad = [](const char* what) {
    throw InputError(std::string("quadratic program: inconsistent dimensions of ") + what);
  };
  if (p.Q.cols() != n) bad("Q");
  if (p.c.size() != n) bad("c");
  if (p.A.rows() > 0 && p.A.cols() != n) bad("A");
  if (p.A.rows() != p.b.size()) bad("b");
  if (p.E.rows() > 0 && p.E.cols() != n) bad("E");
  if (p.E.rows() != p.d.size()) bad("d");
  if ((p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + p.Q.cwiseAbs().maxCoeff()))
    throw InputError("quadratic program: Q is not symmetric");
}

Eigen::VectorXd phase_one(const QpProblem& p, double lp_tol, int max_iterations) {
  const Eigen::Index n = p.variables();
  LinearProgram lp(n);
  if (p.A.rows() > 0) {
    lp.A_ub = p.A;
    lp.b_ub = -p.b;
  }
  if (p.E.rows() > 0) {
    lp.A_eq = p.E;
    lp.b_eq = p.d;
  }
  const LpResult r = solve_lp(lp, {lp_tol, max_iterations});
  if (r.status != LpStatus::optimal)
    throw InfeasibleError("constraint system is infeasible (phase-1 optimum " +
                              std::to_string(r.phase_one_value) + ")",
                          r.phase_one_value);
  return r.x;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& opts) {
  check_dims(problem);
  const Eigen::Index n = problem.variables();
  const Eigen::Index m = problem.A.rows();
  const Eigen::Index me = problem.E.rows();
  const auto& A = problem.A;
  const auto& Q = problem.Q;

  QpSolution sol;
  Eigen::VectorXd x = phase_one(problem, 1e-9, opts.max_iterations);

  std::vector<std::size_t> work;
  std::vector<bool> in_work(static_cast<std::size_t>(m), false);
  Eigen::VectorXd mult;  // multipliers of [E; A_work] from the last solve

  const double step_eps = 1e-12;
  for (int iter = 0;; ++iter) {
    if (iter >= opts.max_iterations)
      throw IterationLimitError("active-set iteration limit exceeded");
    sol.iterations = iter;

    const Eigen::Index k = me + static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd C(k, n);
    if (me > 0) C.topRows(me) = problem.E;
    for (std::size_t w = 0; w < work.size(); ++w)
      C.row(me + static_cast<Eigen::Index>(w)) = A.row(static_cast<Eigen::Index>(work[w]));

    // Equality-constrained subproblem in the step p:
    //   [Q C'; C 0] [p; mult] = [-g; 0]
    const Eigen::VectorXd g = Q * x + problem.c;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = Q;
    kkt.topRightCorner(n, k) = C.transpose();
    kkt.bottomLeftCorner(k, n) = C;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    rhs.head(n) = -g;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-12);
    cod.compute(kkt);
    Eigen::VectorXd sol_kkt = cod.solve(rhs);
    const double resid = (kkt * sol_kkt - rhs).norm();
    const double scale = 1.0 + rhs.norm() + kkt.norm();

    Eigen::VectorXd step;
    bool descent_ray = false;
    if (resid <= 1e-9 * scale) {
      step = sol_kkt.head(n);
      mult = sol_kkt.tail(k);
    } else {
      // No stationary point on the working face: follow a direction of
      // constant curvature zero along which the objective decreases.
      Eigen::MatrixXd QC(n + k, n);
      QC.topRows(n) = Q;
      QC.bottomRows(k) = C;
      const NullspaceBasis z = nullspace(QC, 1e-12);
      step = -(z.basis * (z.basis.transpose() * g));
      if (step.norm() <= step_eps) throw UnboundedError("quadratic program: singular KKT system");
      descent_ray = true;
    }

    if (!descent_ray && step.lpNorm<Eigen::Infinity>() <= step_eps * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      // Stationary on the working face: check the multiplier signs.
      std::size_t drop = work.size();
      for (std::size_t w = 0; w < work.size(); ++w) {
        if (mult(me + static_cast<Eigen::Index>(w)) < -opts.tol &&
            (drop == work.size() || work[w] < work[drop]))
          drop = w;
      }
      if (drop == work.size()) break;
      in_work[work[drop]] = false;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(drop));
      continue;
    }

    double alpha = descent_ray ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_work[static_cast<std::size_t>(i)]) continue;
      const double ap = A.row(i).dot(step);
      if (ap <= step_eps) continue;
      const double slack = std::max(0.0, -(A.row(i).dot(x) + problem.b(i)));
      const double ratio = slack / ap;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    if (!std::isfinite(alpha)) throw UnboundedError("quadratic program is unbounded below");
    x += alpha * step;
    if (blocking >= 0) {
      work.push_back(static_cast<std::size_t>(blocking));
      in_work[static_cast<std::size_t>(blocking)] = true;
    }
  }

  sol.x = x;
  sol.objective = 0.5 * x.dot(Q * x) + problem.c.dot(x);
  sol.mu = Eigen::VectorXd::Zero(m);
  sol.nu = me > 0 ? Eigen::VectorXd(mult.head(me)) : Eigen::VectorXd(0);
  for (std::size_t w = 0; w < work.size(); ++w)
    sol.mu(static_cast<Eigen::Index>(work[w])) = std::max(0.0, mult(me + static_cast<Eigen::Index>(w)));
  sol.active = work;
  std::sort(sol.active.begin(), sol.active.end());

  Eigen::VectorXd stat = Q * x + problem.c;
  if (m > 0) stat += A.transpose() * sol.mu;
  if (me > 0) stat += problem.E.transpose() * sol.nu;
  sol.stationarity = stat.size() ? stat.lpNorm<Eigen::Infinity>() : 0.0;
  sol.feasibility = 0.0;
  sol.slackness = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = A.row(i).dot(x) + problem.b(i);
    sol.feasibility = std::max(sol.feasibility, v);
    sol.slackness = std::max(sol.slackness, std::abs(sol.mu(i) * v));
  }
  if (me > 0)
    sol.feasibility = std::max(sol.feasibility, (problem.E * x - problem.d).lpNorm<Eigen::Infinity>());
  return sol;
}

}  // namespace lukcon
