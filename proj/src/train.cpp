#include "lukcon/train.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "lukcon/errors.hpp"
#include "lukcon/logic.hpp"
#include "lukcon/qp.hpp"

namespace lukcon {

KernelSpec resolve_kernel(const ProblemSpec& spec, const PredicateDecl& decl) {
  const std::string id = decl.kernel.empty() ? "default" : decl.kernel;
  if (auto it = spec.kernels.find(id); it != spec.kernels.end()) return it->second;
  if (!decl.kernel.empty())
    throw InputError("predicate '" + decl.name + "' uses unknown kernel '" + decl.kernel + "'");
  return KernelSpec{};
}

std::optional<std::size_t> TrainingProblem::find_block(const std::string& id) const {
  for (std::size_t h = 0; h < blocks.size(); ++h)
    if (blocks[h].id == id) return h;
  return std::nullopt;
}

Eigen::MatrixXd TrainingProblem::gram_block() const {
  const auto S = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(S, S);
  for (std::size_t j = 0; j < grams.size(); ++j) {
    const auto sl = index.slice(j);
    const auto off = static_cast<Eigen::Index>(sl.offset);
    const auto cnt = static_cast<Eigen::Index>(sl.count);
    K.block(off, off, cnt, cnt) = grams[j].K;
  }
  return K;
}

bool TrainingProblem::unique_optimum() const {
  if (bias) return false;
  for (const GramMatrix& g : grams)
    if (psd_check(g, tol.psd) != Definiteness::positive_definite) return false;
  return true;
}

TrainingProblem make_training_problem(GroundingIndex index,
                                      std::vector<ConstraintBlock> blocks,
                                      std::vector<KernelSpec> kernels, bool bias,
                                      const Tolerances& tol) {
  if (kernels.size() != index.predicate_count())
    throw InputError("one kernel per predicate is required");
  TrainingProblem tp;
  tp.matrix = assemble_M(blocks, index.size(), ConstantPieces::drop);
  tp.index = std::move(index);
  tp.blocks = std::move(blocks);
  tp.kernels = std::move(kernels);
  tp.bias = bias;
  tp.tol = tol;
  for (std::size_t j = 0; j < tp.index.predicate_count(); ++j) {
    tp.kernels[j].validate();
    std::vector<std::vector<double>> pts;
    for (std::size_t s = 0; s < tp.index.slice(j).count; ++s) pts.push_back(tp.index.point(j, s));
    GramMatrix g = gram(tp.kernels[j], pts);
    if (psd_check(g, tol.psd) == Definiteness::invalid)
      throw InputError("Gram matrix of '" + tp.index.predicate(j).name +
                       "' is not positive semidefinite");
    tp.grams.push_back(std::move(g));
  }
  return tp;
}

TrainingProblem assemble_problem(const ProblemSpec& spec) {
  GroundingIndex idx = build_grounding_index(spec.predicates, spec.samples);
  Signature sig;
  for (const PredicateDecl& p : spec.predicates) sig[p.name] = p.domains.size();

  std::vector<ConstraintBlock> blocks;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < spec.formulas.size(); ++i) {
    const FormulaSpec& fs = spec.formulas[i];
    const std::string id = fs.id.empty() ? "phi" + std::to_string(i + 1) : fs.id;
    if (!ids.insert(id).second) throw InputError("duplicate formula id '" + id + "'");
    const Formula f = parse_formula(fs.text, sig);
    blocks.push_back(compile_formula(f, idx, id, fs.text));
  }
  for (const Supervision& sv : spec.samples.supervisions) {
    ConstraintBlock b = pointwise_block(sv, idx);
    if (!ids.insert(b.id).second) throw InputError("duplicate supervision for '" + b.id + "'");
    blocks.push_back(std::move(b));
  }
  for (ConstraintBlock& b : consistency_blocks(idx)) blocks.push_back(std::move(b));

  std::vector<KernelSpec> kernels;
  for (const PredicateDecl& p : spec.predicates) kernels.push_back(resolve_kernel(spec, p));
  return make_training_problem(std::move(idx), std::move(blocks), std::move(kernels),
                               spec.bias, spec.tol);
}

TrainingProblem without_block(const TrainingProblem& tp, std::size_t h) {
  if (h >= tp.blocks.size()) throw InputError("block index out of range");
  std::vector<ConstraintBlock> blocks;
  for (std::size_t i = 0; i < tp.blocks.size(); ++i)
    if (i != h) blocks.push_back(tp.blocks[i]);
  return make_training_problem(tp.index, std::move(blocks), tp.kernels, tp.bias, tp.tol);
}

Eigen::VectorXd TrainedModel::alpha() const {
  Eigen::Index n = 0;
  for (const PredicateModel& pm : predicates) n += pm.alpha.size();
  Eigen::VectorXd a(n);
  Eigen::Index off = 0;
  for (const PredicateModel& pm : predicates) {
    a.segment(off, pm.alpha.size()) = pm.alpha;
    off += pm.alpha.size();
  }
  return a;
}

TrainedModel solve_primal(const TrainingProblem& tp) {
  const auto S = static_cast<Eigen::Index>(tp.index.size());
  const auto J = static_cast<Eigen::Index>(tp.index.predicate_count());
  const Eigen::Index nb = tp.bias ? J : 0;
  const Eigen::MatrixXd K = tp.gram_block();
  const ConstraintMatrix& cm = tp.matrix;

  // p = K alpha + B b, B the coordinate -> predicate indicator.
  Eigen::MatrixXd P(S, S + nb);
  P.leftCols(S) = K;
  if (nb > 0) {
    P.rightCols(nb).setZero();
    for (Eigen::Index k = 0; k < S; ++k)
      P(k, S + static_cast<Eigen::Index>(tp.index.from_global(static_cast<std::size_t>(k)).first)) = 1.0;
  }

  QpProblem qp;
  qp.Q = Eigen::MatrixXd::Zero(S + nb, S + nb);
  qp.Q.topLeftCorner(S, S) = 2.0 * K;
  qp.c = Eigen::VectorXd::Zero(S + nb);
  qp.A = cm.M.transpose() * P;
  qp.b = cm.q;
  qp.E = Eigen::MatrixXd(0, S + nb);
  qp.d = Eigen::VectorXd(0);

  QpSolution sol;
  try {
    sol = solve_qp(qp, {tp.tol.qp, tp.tol.max_iterations});
  } catch (const InfeasibleError& e) {
    throw InfeasibleError("the constraints admit no feasible grounding (phase-1 optimum " +
                              format_double(e.phase_one_value()) + ")",
                          e.phase_one_value());
  }

  TrainedModel m;
  m.mu = sol.mu;
  m.stationarity = sol.stationarity;
  m.feasibility = sol.feasibility;
  m.slackness = sol.slackness;
  m.iterations = sol.iterations;
  m.unique = tp.unique_optimum();

  // Stationarity in alpha: 2K alpha + K M mu = 0.
  const Eigen::VectorXd alpha = cm.cols() ? Eigen::VectorXd(-0.5 * cm.M * sol.mu)
                                          : Eigen::VectorXd(Eigen::VectorXd::Zero(S));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(J);
  if (nb > 0) b = sol.x.tail(nb);
  m.p = K * alpha;
  for (Eigen::Index k = 0; k < S; ++k)
    m.p(k) += b(static_cast<Eigen::Index>(tp.index.from_global(static_cast<std::size_t>(k)).first));

  for (std::size_t j = 0; j < tp.index.predicate_count(); ++j) {
    const auto sl = tp.index.slice(j);
    PredicateModel pm;
    pm.name = tp.index.predicate(j).name;
    pm.kernel = tp.kernels[j];
    for (std::size_t s = 0; s < sl.count; ++s) {
      pm.points.push_back(tp.index.point(j, s));
      pm.tuple_labels.push_back(tp.index.label(sl.offset + s));
    }
    pm.alpha = alpha.segment(static_cast<Eigen::Index>(sl.offset), static_cast<Eigen::Index>(sl.count));
    pm.bias = b(static_cast<Eigen::Index>(j));
    m.loss += pm.alpha.dot(tp.grams[j].K * pm.alpha);
    m.predicates.push_back(std::move(pm));
  }

  m.active.resize(cm.cols());
  m.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cm.cols(); ++c) {
    const double v = cm.M.col(static_cast<Eigen::Index>(c)).dot(m.p) + cm.q(static_cast<Eigen::Index>(c));
    m.active[c] = std::abs(v) <= tp.tol.activity;
    m.max_violation = std::max(m.max_violation, v);
  }
  if (cm.cols() == 0) m.max_violation = 0.0;
  return m;
}

double predict(const PredicateModel& m, std::span<const double> x) {
  double v = m.bias;
  for (std::size_t s = 0; s < m.points.size(); ++s) {
    if (m.points[s].size() != x.size())
      throw InputError("predicate '" + m.name + "' expects inputs of dimension " +
                       std::to_string(m.points[s].size()) + ", got " + std::to_string(x.size()));
    v += m.alpha(static_cast<Eigen::Index>(s)) * m.kernel(m.points[s], x);
  }
  return v;
}

double predict(const TrainedModel& m, std::size_t j, std::span<const double> x) {
  if (j >= m.predicates.size()) throw InputError("predicate index out of range");
  return predict(m.predicates[j], x);
}

double loss(const TrainedModel& m) {
  double total = 0.0;
  for (const PredicateModel& pm : m.predicates) {
    if (pm.points.empty()) continue;
    total += pm.alpha.dot(gram(pm.kernel, pm.points).K * pm.alpha);
  }
  return total;
}

}  // namespace lukcon
