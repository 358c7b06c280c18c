#include "lukcon/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lukcon/errors.hpp"
#include "lukcon/lp.hpp"

namespace lukcon {

const char* to_string(AnalysisMode m) {
  return m == AnalysisMode::all ? "all" : "logical";
}

const char* to_string(SignConvention c) {
  return c == SignConvention::lagrangian ? "lagrangian" : "positive";
}

AnalysisMode parse_analysis_mode(const std::string& s) {
  if (s == "all") return AnalysisMode::all;
  if (s == "logical") return AnalysisMode::logical;
  throw InputError("unknown analysis mode '" + s + "' (expected all or logical)");
}

SignConvention parse_sign_convention(const std::string& s) {
  if (s == "lagrangian") return SignConvention::lagrangian;
  if (s == "positive") return SignConvention::positive;
  throw InputError("unknown sign convention '" + s + "' (expected lagrangian or positive)");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::entailed: return "entailed";
    case Verdict::removable: return "removable";
    case Verdict::candidate: return "candidate";
    case Verdict::necessary: return "necessary";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

std::vector<std::size_t> StationaritySystem::block_columns(std::size_t h) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < column_block.size(); ++c)
    if (column_block[c] == h) out.push_back(c);
  return out;
}

namespace {

bool in_mode(const ConstraintBlock& b, AnalysisMode mode) {
  return mode == AnalysisMode::all || b.family == ConstraintFamily::logical;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace

Eigen::VectorXd logical_coefficients(const TrainingProblem& tp, const TrainedModel& m,
                                     AnalysisMode mode, SignConvention convention) {
  Eigen::VectorXd a = m.alpha();
  if (mode == AnalysisMode::logical) {
    // alpha = -½ (M_L mu_L + M_R mu_R); keep only the logical share.
    const ConstraintMatrix& cm = tp.matrix;
    for (std::size_t c = 0; c < cm.cols(); ++c) {
      if (tp.blocks[cm.column_block[c]].family == ConstraintFamily::logical) continue;
      a += 0.5 * m.mu(static_cast<Eigen::Index>(c)) * cm.M.col(static_cast<Eigen::Index>(c));
    }
  }
  return convention == SignConvention::lagrangian ? Eigen::VectorXd(-a) : a;
}

StationaritySystem stationarity_system(const TrainingProblem& tp, const TrainedModel& m,
                                       AnalysisMode mode, SignConvention convention) {
  const ConstraintMatrix& cm = tp.matrix;
  StationaritySystem sys;
  for (std::size_t c = 0; c < cm.cols(); ++c) {
    if (!in_mode(tp.blocks[cm.column_block[c]], mode)) continue;
    sys.columns.push_back(c);
    sys.column_block.push_back(cm.column_block[c]);
    sys.labels.push_back(cm.labels[c]);
    sys.active.push_back(m.active[c]);
  }
  sys.M.resize(cm.M.rows(), static_cast<Eigen::Index>(sys.columns.size()));
  for (std::size_t i = 0; i < sys.columns.size(); ++i)
    sys.M.col(static_cast<Eigen::Index>(i)) = cm.M.col(static_cast<Eigen::Index>(sys.columns[i]));
  sys.target = logical_coefficients(tp, m, mode, convention);
  return sys;
}

GeneralSolution solve_stationarity(const Eigen::MatrixXd& M, const Eigen::VectorXd& target,
                               const std::vector<bool>& active, const Tolerances& tol) {
  if (static_cast<std::size_t>(M.cols()) != active.size() || M.rows() != target.size())
    throw InputError("stationarity system: inconsistent dimensions");
  std::vector<Eigen::Index> cols;
  for (std::size_t c = 0; c < active.size(); ++c)
    if (active[c]) cols.push_back(static_cast<Eigen::Index>(c));
  Eigen::MatrixXd Ma(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) Ma.col(static_cast<Eigen::Index>(i)) = M.col(cols[i]);

  GeneralSolution gs;
  const LeastSquaresResult ls = solve_linear_least_squares(Ma, target, tol.nullspace);
  gs.residual = ls.residual;
  if (ls.residual > tol.stationarity)
    throw InconsistentSystemError("stationarity system is inconsistent (residual " +
                                      format_double(ls.residual) + ")",
                                  ls.residual);
  const NullspaceBasis ns = nullspace(Ma, tol.nullspace);
  gs.rank = ns.rank;
  gs.particular = Eigen::VectorXd::Zero(M.cols());
  gs.basis = Eigen::MatrixXd::Zero(M.cols(), static_cast<Eigen::Index>(ns.dimension()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    gs.particular(cols[i]) = ls.x(static_cast<Eigen::Index>(i));
    gs.basis.row(cols[i]) = ns.basis.row(static_cast<Eigen::Index>(i));
  }
  return gs;
}

DeactivationSystem deactivation_system(const GeneralSolution& gs,
                                       const std::vector<std::size_t>& zero_columns,
                                       const std::vector<bool>& active) {
  const auto n = static_cast<Eigen::Index>(gs.dimension());
  DeactivationSystem ds;
  std::vector<bool> zeroed(active.size(), false);
  for (std::size_t c : zero_columns) zeroed[c] = true;
  std::vector<std::size_t> eq, ub;
  for (std::size_t c = 0; c < active.size(); ++c) {
    if (zeroed[c])
      eq.push_back(c);
    else if (active[c])
      ub.push_back(c);
  }
  ds.E.resize(static_cast<Eigen::Index>(eq.size()), n);
  ds.d.resize(static_cast<Eigen::Index>(eq.size()));
  for (std::size_t i = 0; i < eq.size(); ++i) {
    ds.E.row(static_cast<Eigen::Index>(i)) = gs.basis.row(static_cast<Eigen::Index>(eq[i]));
    ds.d(static_cast<Eigen::Index>(i)) = -gs.particular(static_cast<Eigen::Index>(eq[i]));
  }
  ds.G.resize(static_cast<Eigen::Index>(ub.size()), n);
  ds.g.resize(static_cast<Eigen::Index>(ub.size()));
  for (std::size_t i = 0; i < ub.size(); ++i) {
    ds.G.row(static_cast<Eigen::Index>(i)) = -gs.basis.row(static_cast<Eigen::Index>(ub[i]));
    ds.g(static_cast<Eigen::Index>(i)) = gs.particular(static_cast<Eigen::Index>(ub[i]));
  }
  return ds;
}

std::optional<MultiplierCertificate> deactivate(const GeneralSolution& gs,
                                                const StationaritySystem& sys,
                                                std::size_t block, const Tolerances& tol,
                                                double* phase_one) {
  const std::vector<std::size_t> cols = sys.block_columns(block);
  const DeactivationSystem ds = deactivation_system(gs, cols, sys.active);
  const auto n = static_cast<Eigen::Index>(gs.dimension());

  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
  double p1 = 0.0;
  if (n == 0) {
    for (Eigen::Index i = 0; i < ds.d.size(); ++i) p1 += std::abs(ds.d(i));
    for (Eigen::Index i = 0; i < ds.g.size(); ++i) p1 += std::max(0.0, -ds.g(i));
    if (phase_one) *phase_one = p1;
    if (p1 > tol.lp) return std::nullopt;
  } else {
    LinearProgram lp(n);
    lp.A_eq = ds.E;
    lp.b_eq = ds.d;
    lp.A_ub = ds.G;
    lp.b_ub = ds.g;
    const LpResult r = solve_lp(lp, {tol.lp, tol.max_iterations});
    if (phase_one) *phase_one = r.phase_one_value;
    if (r.status != LpStatus::optimal) return std::nullopt;
    t = r.x;
  }

  MultiplierCertificate cert;
  cert.t = t;
  cert.lambda = gs.at(t);
  cert.deactivated = block;
  // Entries within LP round-off of their bound are set to the bound.
  const double snap = 10.0 * tol.lp;
  for (std::size_t c : cols) {
    if (std::abs(cert.lambda(static_cast<Eigen::Index>(c))) > snap) return std::nullopt;
    cert.lambda(static_cast<Eigen::Index>(c)) = 0.0;
  }
  for (Eigen::Index c = 0; c < cert.lambda.size(); ++c) {
    double& v = cert.lambda(c);
    if (v < -snap) return std::nullopt;
    if (v < 0.0 || !sys.active[static_cast<std::size_t>(c)]) v = 0.0;
  }
  cert.residual = inf_norm(sys.M * cert.lambda - sys.target);
  if (cert.residual > tol.stationarity) return std::nullopt;
  return cert;
}

std::optional<Eigen::VectorXd> relaxed_deactivation(const GeneralSolution& gs,
                                                    const StationaritySystem& sys,
                                                    std::size_t block,
                                                    const Tolerances& tol) {
  const std::vector<std::size_t> cols = sys.block_columns(block);
  const DeactivationSystem ds = deactivation_system(gs, cols, sys.active);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gs.dimension()));
  if (ds.E.rows() > 0 && ds.E.cols() > 0) {
    const LeastSquaresResult ls = solve_linear_least_squares(ds.E, ds.d, tol.nullspace);
    t = ls.x;
  }
  Eigen::VectorXd lambda = gs.at(t);
  for (std::size_t c : cols)
    if (std::abs(lambda(static_cast<Eigen::Index>(c))) > tol.stationarity) return std::nullopt;
  for (std::size_t c : cols) lambda(static_cast<Eigen::Index>(c)) = 0.0;
  return lambda;
}

EntailmentResult grounded_entailment(const std::vector<ConstraintBlock>& blocks,
                                     std::size_t h, std::size_t dimension,
                                     const Tolerances& tol) {
  if (h >= blocks.size()) throw InputError("block index out of range");
  const auto S = static_cast<Eigen::Index>(dimension);
  EntailmentResult res;

  std::vector<const ConstraintPiece*> premises;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b == h) continue;
    for (const ConstraintPiece& piece : blocks[b].pieces) {
      if (piece.is_constant()) {
        if (piece.offset > 0.0) res.premises_infeasible = true;
        continue;
      }
      premises.push_back(&piece);
    }
  }

  LinearProgram lp(S);
  lp.lower = Eigen::VectorXd::Zero(S);
  lp.upper = Eigen::VectorXd::Ones(S);
  lp.A_ub = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(premises.size()), S);
  lp.b_ub.resize(static_cast<Eigen::Index>(premises.size()));
  for (std::size_t i = 0; i < premises.size(); ++i) {
    for (const auto& [k, v] : premises[i]->row.entries())
      lp.A_ub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    lp.b_ub(static_cast<Eigen::Index>(i)) = -premises[i]->offset;
  }

  res.entailed = true;
  for (const ConstraintPiece& piece : blocks[h].pieces) {
    if (res.premises_infeasible) {
      res.piece_max.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    lp.objective = Eigen::VectorXd::Zero(S);
    for (const auto& [k, v] : piece.row.entries()) lp.objective(static_cast<Eigen::Index>(k)) = -v;
    const LpResult r = solve_lp(lp, {tol.lp, tol.max_iterations});
    if (r.status == LpStatus::infeasible) {
      res.premises_infeasible = true;
      res.piece_max.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    const double value = -r.objective + piece.offset;
    res.piece_max.push_back(value);
    if (value > tol.entailment) res.entailed = false;
  }
  if (res.premises_infeasible) {
    res.entailed = true;
    std::fill(res.piece_max.begin(), res.piece_max.end(),
              -std::numeric_limits<double>::infinity());
  }
  return res;
}

std::vector<SupportSet> minimal_support_sets(const StationaritySystem& sys,
                                             const Tolerances& tol, std::size_t limit) {
  std::vector<std::size_t> active_blocks;
  for (std::size_t c = 0; c < sys.columns.size(); ++c)
    if (sys.active[c] &&
        std::find(active_blocks.begin(), active_blocks.end(), sys.column_block[c]) ==
            active_blocks.end())
      active_blocks.push_back(sys.column_block[c]);
  std::sort(active_blocks.begin(), active_blocks.end());
  if (active_blocks.size() > limit)
    throw ResourceLimitError(std::to_string(active_blocks.size()) +
                             " active blocks exceed the minimal-set limit of " +
                             std::to_string(limit));

  const auto N = static_cast<Eigen::Index>(sys.columns.size());
  std::vector<SupportSet> found;
  if (inf_norm(sys.target) <= tol.stationarity) {
    found.push_back({{}, Eigen::VectorXd::Zero(N)});
    return found;
  }
  const double feas_tol = tol.lp * (1.0 + sys.target.lpNorm<1>());

  const std::size_t B = active_blocks.size();
  for (std::size_t k = 1; k <= B && found.empty(); ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<Eigen::Index> cols;
      for (std::size_t i : pick)
        for (std::size_t c = 0; c < sys.columns.size(); ++c)
          if (sys.active[c] && sys.column_block[c] == active_blocks[i])
            cols.push_back(static_cast<Eigen::Index>(c));
      LinearProgram lp(static_cast<Eigen::Index>(cols.size()));
      lp.lower = Eigen::VectorXd::Zero(lp.variables());
      lp.A_eq.resize(sys.M.rows(), lp.variables());
      for (std::size_t i = 0; i < cols.size(); ++i)
        lp.A_eq.col(static_cast<Eigen::Index>(i)) = sys.M.col(cols[i]);
      lp.b_eq = sys.target;
      const LpResult r = solve_lp(lp, {feas_tol, tol.max_iterations});
      if (r.status == LpStatus::optimal) {
        SupportSet s;
        for (std::size_t i : pick) s.blocks.push_back(active_blocks[i]);
        s.lambda = Eigen::VectorXd::Zero(N);
        for (std::size_t i = 0; i < cols.size(); ++i)
          s.lambda(cols[i]) = std::max(0.0, r.x(static_cast<Eigen::Index>(i)));
        if (inf_norm(sys.M * s.lambda - sys.target) <= tol.stationarity)
          found.push_back(std::move(s));
      }
      // Next k-combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == B - k + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return found;
}

AblationRecord ablate_and_compare(const TrainingProblem& tp, const TrainedModel& full,
                                  std::size_t h) {
  if (h >= tp.blocks.size()) throw InputError("block index out of range");
  const TrainingProblem reduced = without_block(tp, h);
  const TrainedModel ablated = solve_primal(reduced);

  AblationRecord rec;
  rec.block = h;
  rec.block_id = tp.blocks[h].id;
  rec.loss_full = full.loss;
  rec.loss_ablated = ablated.loss;
  rec.p_full = full.p;
  rec.p_ablated = ablated.p;
  rec.p_distance = inf_norm(full.p - ablated.p);
  double worst = 0.0;
  for (const ConstraintBlock& b : tp.blocks)
    for (const ConstraintPiece& piece : b.pieces)
      worst = std::max(worst, piece.eval(std::span<const double>(
                                  ablated.p.data(), static_cast<std::size_t>(ablated.p.size()))));
  rec.ablated_max_violation = worst;
  rec.ablated_feasible_for_full = worst <= tp.tol.feasibility;
  return rec;
}

AblationRecord ablate_and_compare(const TrainingProblem& tp, std::size_t h) {
  return ablate_and_compare(tp, solve_primal(tp), h);
}

AnalysisReport removable_constraints(const TrainingProblem& tp, const TrainedModel& m,
                                     const AnalysisOptions& opts) {
  AnalysisReport rep;
  rep.options = opts;
  rep.system = stationarity_system(tp, m, opts.mode, opts.convention);
  rep.unique = tp.unique_optimum();
  try {
    rep.solution = solve_stationarity(rep.system.M, rep.system.target, rep.system.active, tp.tol);
    rep.stationarity_residual = rep.solution->residual;
  } catch (const InconsistentSystemError& e) {
    rep.stationarity_residual = e.residual();
  }

  for (std::size_t h = 0; h < tp.blocks.size(); ++h) {
    BlockAnalysis ba;
    ba.block = h;
    for (std::size_t c : tp.matrix.block_columns[h]) ba.active = ba.active || m.active[c];
    const bool in_system = in_mode(tp.blocks[h], opts.mode);
    ba.analyzed = in_system && rep.solution.has_value();

    if (opts.entailment) ba.entailment = grounded_entailment(tp.blocks, h, tp.index.size(), tp.tol);
    if (ba.analyzed) {
      ba.certificate = deactivate(*rep.solution, rep.system, h, tp.tol, &ba.deactivation_phase_one);
      if (!ba.certificate)
        ba.relaxed_certificate = relaxed_deactivation(*rep.solution, rep.system, h, tp.tol);
    }

    if (ba.entailment && ba.entailment->entailed) {
      ba.verdict = Verdict::entailed;
    } else if (!in_system) {
      ba.verdict = Verdict::undetermined;
      ba.note = "outside the analysis mode";
    } else if (!rep.solution) {
      ba.verdict = Verdict::undetermined;
      ba.note = "stationarity system is inconsistent";
    } else if (ba.certificate) {
      ba.verdict = rep.unique ? Verdict::removable : Verdict::candidate;
      if (!ba.active) ba.note = "inactive at the optimum";
    } else {
      ba.verdict = Verdict::necessary;
      if (ba.relaxed_certificate) ba.note = "only a sign-relaxed multiplier vector exists";
    }

    if (opts.ablation) ba.ablation = ablate_and_compare(tp, m, h);
    rep.blocks.push_back(std::move(ba));
  }

  if (opts.minimal_sets && rep.solution)
    rep.minimal_sets = minimal_support_sets(rep.system, tp.tol, opts.minimal_set_limit);
  return rep;
}

}  // namespace lukcon
