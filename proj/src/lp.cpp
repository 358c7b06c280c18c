#include "lukcon/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lukcon/errors.hpp"

namespace lukcon {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;

// x_j = base + y[pos] - y[neg]; -1 marks an absent part.
struct VarMap {
  double base = 0.0;
  int pos = -1;
  int neg = -1;
};

class Tableau {
 public:
  Tableau(Eigen::MatrixXd rows, std::vector<int> basis, int max_iterations)
      : t_(std::move(rows)), basis_(std::move(basis)), max_iterations_(max_iterations) {
    m_ = static_cast<int>(t_.rows()) - 1;
    rhs_ = static_cast<int>(t_.cols()) - 1;
    active_.assign(static_cast<std::size_t>(m_), true);
  }

  // Objective row from column costs: reduced costs and -c_B·b.
  void set_costs(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(rhs_) = cost.transpose();
    for (int i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double cb = cost(basis_[i]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false when unbounded.
  bool run(const std::vector<bool>& allowed, int& iterations) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < rhs_; ++j)
        if (allowed[j] && t_(m_, j) < -kCostEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (!active_[i] || t_(i, enter) <= kPivotEps) continue;
        const double ratio = std::max(0.0, t_(i, rhs_)) / t_(i, enter);
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++iterations > max_iterations_)
        throw IterationLimitError("simplex iteration limit exceeded");
    }
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  double value(int i) const { return t_(i, rhs_); }
  double entry(int i, int j) const { return t_(i, j); }
  double objective_row_rhs() const { return t_(m_, rhs_); }
  int rows() const { return m_; }
  int basis(int i) const { return basis_[i]; }
  bool active(int i) const { return active_[i]; }
  void deactivate(int i) { active_[i] = false; }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  std::vector<bool> active_;
  int m_ = 0;
  int rhs_ = 0;
  int max_iterations_;
};

void check_dims(const LinearProgram& lp) {
  const Eigen::Index n = lp.variables();
  auto bad = [](const char* what) {
    throw InputError(std::string("linear program: inconsistent dimensions of ") + what);
  };
  if (lp.A_ub.rows() > 0 && lp.A_ub.cols() != n) bad("A_ub");
  if (lp.A_ub.rows() != lp.b_ub.size()) bad("b_ub");
  if (lp.A_eq.rows() > 0 && lp.A_eq.cols() != n) bad("A_eq");
  if (lp.A_eq.rows() != lp.b_eq.size()) bad("b_eq");
  if (lp.lower.size() != 0 && lp.lower.size() != n) bad("lower");
  if (lp.upper.size() != 0 && lp.upper.size() != n) bad("upper");
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts) {
  check_dims(lp);
  const Eigen::Index n = lp.variables();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Shift / split variables so that every standard-form variable is >= 0.
  std::vector<VarMap> vars(static_cast<std::size_t>(n));
  int ny = 0;
  struct BoundRow {
    int y;
    double cap;
  };
  std::vector<BoundRow> bound_rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lp.lower.size() ? lp.lower(j) : -inf;
    const double hi = lp.upper.size() ? lp.upper(j) : inf;
    if (lo > hi) {
      LpResult r;
      r.status = LpStatus::infeasible;
      r.phase_one_value = lo - hi;
      return r;
    }
    VarMap& v = vars[static_cast<std::size_t>(j)];
    if (std::isfinite(lo)) {
      v.base = lo;
      v.pos = ny++;
      if (std::isfinite(hi)) bound_rows.push_back({v.pos, hi - lo});
    } else if (std::isfinite(hi)) {
      v.base = hi;
      v.neg = ny++;
    } else {
      v.pos = ny++;
      v.neg = ny++;
    }
  }

  // Rows over y: (coefficients, rhs, is_inequality).
  const Eigen::Index n_ub = lp.A_ub.rows() + static_cast<Eigen::Index>(bound_rows.size());
  const Eigen::Index n_eq = lp.A_eq.rows();
  const Eigen::Index m = n_ub + n_eq;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, ny);
  Eigen::VectorXd rhs(m);
  auto transform = [&](Eigen::Index r, const Eigen::RowVectorXd& a, double b) {
    double shifted = b;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = a(j);
      if (c == 0.0) continue;
      const VarMap& v = vars[static_cast<std::size_t>(j)];
      shifted -= c * v.base;
      if (v.pos >= 0) rows(r, v.pos) += c;
      if (v.neg >= 0) rows(r, v.neg) -= c;
    }
    rhs(r) = shifted;
  };
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < lp.A_ub.rows(); ++i, ++r) transform(r, lp.A_ub.row(i), lp.b_ub(i));
  for (const BoundRow& b : bound_rows) {
    rows(r, b.y) = 1.0;
    rhs(r) = b.cap;
    ++r;
  }
  for (Eigen::Index i = 0; i < n_eq; ++i, ++r) transform(r, lp.A_eq.row(i), lp.b_eq(i));

  // Columns: y | slacks | artificials | rhs.
  std::vector<int> art_row;
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rhs(i) < 0.0) sign[static_cast<std::size_t>(i)] = -1.0;
    const bool slack_basic = i < n_ub && sign[static_cast<std::size_t>(i)] > 0.0;
    if (!slack_basic) art_row.push_back(static_cast<int>(i));
  }
  const int ns = static_cast<int>(n_ub);
  const int na = static_cast<int>(art_row.size());
  const int ncols = ny + ns + na;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, ncols + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = sign[static_cast<std::size_t>(i)];
    t.row(i).head(ny) = s * rows.row(i);
    if (i < n_ub) t(i, ny + i) = s;
    t(i, ncols) = s * rhs(i);
    if (i < n_ub && s > 0.0) basis[static_cast<std::size_t>(i)] = ny + static_cast<int>(i);
  }
  for (int a = 0; a < na; ++a) {
    t(art_row[a], ny + ns + a) = 1.0;
    basis[static_cast<std::size_t>(art_row[a])] = ny + ns + a;
  }

  Tableau tab(std::move(t), std::move(basis), opts.max_iterations);
  LpResult result;

  std::vector<bool> allowed(static_cast<std::size_t>(ncols), true);
  if (na > 0) {
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(ncols);
    cost1.tail(na).setOnes();
    tab.set_costs(cost1);
    tab.run(allowed, result.iterations);
    result.phase_one_value = std::max(0.0, -tab.objective_row_rhs());
    if (result.phase_one_value > opts.feasibility_tol) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are linearly dependent and dropped.
    for (int i = 0; i < tab.rows(); ++i) {
      if (tab.basis(i) < ny + ns) continue;
      int col = -1;
      for (int j = 0; j < ny + ns; ++j)
        if (std::abs(tab.entry(i, j)) > 1e-9) {
          col = j;
          break;
        }
      if (col >= 0)
        tab.pivot(i, col);
      else
        tab.deactivate(i);
    }
    for (int a = 0; a < na; ++a) allowed[static_cast<std::size_t>(ny + ns + a)] = false;
  }

  Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(ncols);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& v = vars[static_cast<std::size_t>(j)];
    if (v.pos >= 0) cost2(v.pos) += lp.objective(j);
    if (v.neg >= 0) cost2(v.neg) -= lp.objective(j);
  }
  tab.set_costs(cost2);
  if (!tab.run(allowed, result.iterations)) {
    result.status = LpStatus::unbounded;
    return result;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < tab.rows(); ++i)
    if (tab.active(i)) y(tab.basis(i)) = std::max(0.0, tab.value(i));
  result.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& v = vars[static_cast<std::size_t>(j)];
    double x = v.base;
    if (v.pos >= 0) x += y(v.pos);
    if (v.neg >= 0) x -= y(v.neg);
    result.x(j) = x;
  }
  result.objective = lp.objective.dot(result.x);
  result.status = LpStatus::optimal;
  return result;
}

std::optional<Eigen::VectorXd> lp_feasible(const Eigen::MatrixXd& E,
                                           const Eigen::VectorXd& d,
                                           const Eigen::MatrixXd& G,
                                           const Eigen::VectorXd& g,
                                           const LpOptions& opts) {
  const Eigen::Index n = std::max(E.cols(), G.cols());
  LinearProgram lp(n);
  lp.A_eq = E.rows() ? E : Eigen::MatrixXd(0, n);
  lp.b_eq = d;
  lp.A_ub = G.rows() ? G : Eigen::MatrixXd(0, n);
  lp.b_ub = g;
  const LpResult r = solve_lp(lp, opts);
  if (r.status == LpStatus::infeasible) return std::nullopt;
  return r.x;
}

}  // namespace lukcon
