#include <doctest.h>

#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "lukcon/errors.hpp"
#include "lukcon/lp.hpp"

using namespace lukcon;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Best vertex of {A x <= b}, found by solving every square subsystem.
std::optional<double> vertex_enumeration(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& b) {
  const int n = static_cast<int>(A.cols()), m = static_cast<int>(A.rows());
  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd S(n, n);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) {
        S.row(i) = A.row(pick[i]);
        r(i) = b(pick[i]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      if ((A * x - b).maxCoeff() > 1e-9) return;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("small LP with a known optimum") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (1.6, 1.2)
  LinearProgram lp(2);
  lp.objective << -1, -1;
  lp.A_ub.resize(2, 2);
  lp.A_ub << 1, 2, 3, 1;
  lp.b_ub.resize(2);
  lp.b_ub << 4, 6;
  lp.lower = Eigen::VectorXd::Zero(2);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.6));
  CHECK(r.x(1) == doctest::Approx(1.2));
  CHECK(r.objective == doctest::Approx(-2.8));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram inf(1);
  inf.A_ub.resize(2, 1);
  inf.A_ub << 1, -1;
  inf.b_ub.resize(2);
  inf.b_ub << -1, -1;  // x <= -1 and x >= 1
  const LpResult r = solve_lp(inf);
  CHECK(r.status == LpStatus::infeasible);
  CHECK(r.phase_one_value > 1e-9);

  LinearProgram unb(1);
  unb.objective << -1;
  unb.lower = Eigen::VectorXd::Zero(1);
  CHECK(solve_lp(unb).status == LpStatus::unbounded);
}

TEST_CASE("equalities, free variables and upper-only bounds") {
  LinearProgram lp(3);
  lp.objective << 1, 1, -1;
  lp.A_eq.resize(1, 3);
  lp.A_eq << 1, -1, 0;
  lp.b_eq.resize(1);
  lp.b_eq << -2;  // x0 = x1 - 2
  lp.lower = Eigen::Vector3d(-kInf, -1, -kInf);
  lp.upper = Eigen::Vector3d(kInf, kInf, 5);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x(1) == doctest::Approx(-1));
  CHECK(r.x(0) == doctest::Approx(-3));
  CHECK(r.x(2) == doctest::Approx(5));
}

TEST_CASE("Bland's rule terminates on a cycling-prone program") {
  // Beale's example cycles under the largest-coefficient rule.
  LinearProgram lp(4);
  lp.objective << -0.75, 150, -0.02, 6;
  lp.A_ub.resize(3, 4);
  lp.A_ub << 0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0;
  lp.b_ub.resize(3);
  lp.b_ub << 0, 0, 1;
  lp.lower = Eigen::VectorXd::Zero(4);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(-0.05));
}

TEST_CASE("iteration cap and dimension checks") {
  LinearProgram lp(2);
  lp.objective << -1, -1;
  lp.A_ub.resize(1, 2);
  lp.A_ub << 1, 1;
  lp.b_ub.resize(1);
  lp.b_ub << 1;
  lp.lower = Eigen::VectorXd::Zero(2);
  LpOptions opts;
  opts.max_iterations = 0;
  CHECK_THROWS_AS(solve_lp(lp, opts), IterationLimitError);
  LinearProgram bad(2);
  bad.A_ub.resize(1, 3);
  bad.b_ub.resize(1);
  CHECK_THROWS_AS(solve_lp(bad), InputError);
}

TEST_CASE("lp_feasible finds a point or proves infeasibility") {
  Eigen::MatrixXd E(1, 2), G(2, 2);
  E << 1, 1;
  G << -1, 0, 0, -1;
  const auto t = lp_feasible(E, Eigen::VectorXd::Constant(1, 1.0), G, Eigen::VectorXd::Zero(2));
  REQUIRE(t);
  CHECK((*t)(0) + (*t)(1) == doctest::Approx(1.0));
  CHECK((*t).minCoeff() >= -1e-12);
  CHECK_FALSE(lp_feasible(E, Eigen::VectorXd::Constant(1, -1.0), G, Eigen::VectorXd::Zero(2)));
}

TEST_CASE("property: simplex optimum equals the best enumerated vertex") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 3, m = 2 + k % 4;
    Eigen::MatrixXd A(m + 2 * n, n);
    Eigen::VectorXd b(m + 2 * n), c(n), x0(n);
    for (int j = 0; j < n; ++j) {
      c(j) = g(rng);
      x0(j) = 2 * unit(rng);
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = g(rng);
      b(i) = A.row(i).dot(x0) + (unit(rng) < 0.3 ? 0.0 : unit(rng));
    }
    for (int j = 0; j < n; ++j) {
      A.row(m + 2 * j).setZero();
      A(m + 2 * j, j) = 1;
      b(m + 2 * j) = 2;
      A.row(m + 2 * j + 1).setZero();
      A(m + 2 * j + 1, j) = -1;
      b(m + 2 * j + 1) = 0;
    }
    LinearProgram lp(n);
    lp.objective = c;
    lp.A_ub = A;
    lp.b_ub = b;
    const LpResult r = solve_lp(lp);
    const auto best = vertex_enumeration(c, A, b);
    REQUIRE(best);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(*best).epsilon(1e-9));
    CHECK((A * r.x - b).maxCoeff() <= 1e-9);
  }
}
