#include "support/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lukcon/lp.hpp"

namespace oracle {

std::string atom_key(const std::string& predicate, const std::vector<std::string>& args) {
  std::string key = predicate + "(";
  for (std::size_t i = 0; i < args.size(); ++i) key += (i ? "," : "") + args[i];
  return key + ")";
}

namespace {

using lukcon::Connective;
using lukcon::Formula;

double truth(const Formula& f, const Valuation& v, std::map<std::string, std::string>& env) {
  switch (f.kind) {
    case Connective::Atom: {
      std::vector<std::string> args;
      for (const std::string& t : f.args) {
        auto it = env.find(t);
        args.push_back(it == env.end() ? t : it->second);
      }
      auto it = v.atoms.find(atom_key(f.name, args));
      if (it == v.atoms.end()) throw std::runtime_error("oracle: no value for " + atom_key(f.name, args));
      return it->second;
    }
    case Connective::Neg: return 1.0 - truth(f.children[0], v, env);
    case Connective::Forall: {
      const auto saved = env.find(f.name) == env.end()
                             ? std::optional<std::string>{}
                             : std::optional<std::string>{env[f.name]};
      double m = 1.0;
      for (const std::string& s : v.universe) {
        env[f.name] = s;
        m = std::min(m, truth(f.children[0], v, env));
      }
      if (saved) env[f.name] = *saved;
      else env.erase(f.name);
      return m;
    }
    default: break;
  }
  const double x = truth(f.children[0], v, env);
  const double y = truth(f.children[1], v, env);
  switch (f.kind) {
    case Connective::StrongConj: return std::max(0.0, x + y - 1.0);
    case Connective::StrongDisj: return std::min(1.0, x + y);
    case Connective::WeakConj: return std::min(x, y);
    case Connective::WeakDisj: return std::max(x, y);
    case Connective::Implies: return std::min(1.0, 1.0 - x + y);
    default: throw std::logic_error("oracle: unexpected connective");
  }
}

}  // namespace

double truth(const lukcon::Formula& f, const Valuation& v) {
  std::map<std::string, std::string> env;
  return truth(f, v, env);
}

std::optional<QpOptimum> brute_force_qp(const QpCase& qp) {
  const int n = static_cast<int>(qp.Q.rows());
  const int m = static_cast<int>(qp.A.rows());
  if (m > 20) throw std::invalid_argument("brute_force_qp: too many rows");
  std::optional<QpOptimum> best;
  std::size_t tried = 0;
  for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
      if (mask & (1ul << i)) rows.push_back(i);
    if (static_cast<int>(rows.size()) > n) continue;
    ++tried;
    const int k = static_cast<int>(rows.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = qp.Q;
    rhs.head(n) = -qp.c;
    for (int r = 0; r < k; ++r) {
      kkt.block(n + r, 0, 1, n) = qp.A.row(rows[r]);
      kkt.block(0, n + r, n, 1) = qp.A.row(rows[r]).transpose();
      rhs(n + r) = -qp.b(rows[r]);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    const Eigen::VectorXd sol = cod.solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
    const Eigen::VectorXd x = sol.head(n);
    if (k > 0 && sol.tail(k).minCoeff() < -1e-9) continue;
    if (m > 0 && (qp.A * x + qp.b).maxCoeff() > 1e-9) continue;
    const double obj = 0.5 * x.dot(qp.Q * x) + qp.c.dot(x);
    if (!best || obj < best->objective) best = QpOptimum{x, obj, 0};
  }
  if (best) best->subsets_tried = tried;
  return best;
}

namespace {

Eigen::MatrixXd normal_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd out(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out(i, j) = g(rng);
  return out;
}

}  // namespace

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  const Eigen::MatrixXd R = normal_matrix(rng, n, n);
  return R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, int rank) {
  const Eigen::MatrixXd R = normal_matrix(rng, rank, n);
  return R.transpose() * R;
}

QpCase random_qp(std::mt19937_64& rng, int n, int m, bool definite) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QpCase qp;
  qp.Q = definite ? random_spd(rng, n) : random_psd(rng, n, std::max(1, n / 2));
  qp.c = 3.0 * normal_matrix(rng, n, 1).col(0);
  Eigen::VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = 2.0 * unit(rng) - 1.0;
  const int box = definite ? 0 : 2 * n;
  qp.A.resize(m + box, n);
  qp.b.resize(m + box);
  if (m > 0) qp.A.topRows(m) = normal_matrix(rng, m, n);
  for (int i = 0; i < m; ++i) {
    // Some rows pass through x0 so degenerate vertices show up.
    const double slack = unit(rng) < 0.25 ? 0.0 : unit(rng);
    qp.b(i) = -qp.A.row(i).dot(x0) - slack;
  }
  for (int i = 0; i < n && box; ++i) {
    qp.A.row(m + 2 * i).setZero();
    qp.A(m + 2 * i, i) = 1.0;
    qp.b(m + 2 * i) = -3.0;
    qp.A.row(m + 2 * i + 1).setZero();
    qp.A(m + 2 * i + 1, i) = -1.0;
    qp.b(m + 2 * i + 1) = -3.0;
  }
  return qp;
}

double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd Qa = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() *
                             Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const Eigen::MatrixXd Qb = Eigen::HouseholderQR<Eigen::MatrixXd>(B).householderQ() *
                             Eigen::MatrixXd::Identity(B.rows(), B.cols());
  // Sines of the principal angles are the singular values of the part of Qb
  // outside span(Qa); this stays accurate for tiny angles.
  const Eigen::MatrixXd R = Qb - Qa * (Qa.transpose() * Qb);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues().maxCoeff();
  return std::asin(std::min(1.0, s));
}

lukcon::ProblemSpec transitive_problem(std::mt19937_64& rng, std::size_t points,
                                       double label_probability) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  lukcon::ProblemSpec spec;
  lukcon::Domain d{"S", {}};
  for (std::size_t i = 0; i < points; ++i)
    d.samples.push_back({"x" + std::to_string(i + 1), {unit(rng), unit(rng)}});
  spec.samples.domains["S"] = d;
  for (const char* p : {"p1", "p2", "p3"}) spec.predicates.push_back({p, {"S"}, ""});
  lukcon::KernelSpec k;
  k.kind = lukcon::KernelKind::rbf;
  k.width = 0.5;
  spec.kernels["default"] = k;
  spec.formulas = {{"phi1", "forall x: p1(x) -> p2(x)"},
                   {"phi2", "forall x: p2(x) -> p3(x)"},
                   {"phi3", "forall x: p1(x) -> p3(x)"}};
  for (const auto& p : spec.predicates)
    for (const auto& s : d.samples)
      if (unit(rng) < label_probability)
        spec.samples.supervisions.push_back({p.name, {s.name}, unit(rng) < 0.5 ? 1 : -1});
  return spec;
}

std::optional<Eigen::VectorXd> lambda_space_certificate(const Eigen::MatrixXd& M,
                                                        const Eigen::VectorXd& target,
                                                        const std::vector<bool>& active,
                                                        const std::vector<std::size_t>& zero,
                                                        double tol) {
  const Eigen::Index n = M.cols();
  lukcon::LinearProgram lp(n);
  lp.A_eq = M;
  lp.b_eq = target;
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 0; c < n; ++c)
    if (!active[static_cast<std::size_t>(c)]) lp.upper(c) = 0.0;
  for (std::size_t c : zero) lp.upper(static_cast<Eigen::Index>(c)) = 0.0;
  lukcon::LpOptions opts;
  opts.feasibility_tol = tol;
  const lukcon::LpResult r = lukcon::solve_lp(lp, opts);
  if (r.status != lukcon::LpStatus::optimal) return std::nullopt;
  return r.x;
}

}  // namespace oracle
