#include <doctest.h>

#include <random>

#include "lukcon/analyze.hpp"
#include "lukcon/errors.hpp"
#include "lukcon/linalg.hpp"
#include "lukcon/problem_file.hpp"
#include "lukcon/random.hpp"
#include "support/oracle.hpp"

using namespace lukcon;

namespace {

const std::string kFixtures = LUKCON_FIXTURES;

TrainingProblem fixture(const std::string& name) {
  return assemble_problem(load_problem(kFixtures + "/" + name + ".json"));
}

// The two-point transitive system with reference multipliers and every
// piece active.
StationaritySystem two_point_system() {
  StationaritySystem sys;
  sys.M.resize(6, 6);
  sys.M << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, -1, 0, 1, 0, 0, 0, 0, -1, 0, 1, 0, 0, 0, 0,
      -1, 0, -1, 0, 0, 0, 0, -1, 0, -1;
  sys.target.resize(6);
  sys.target << 0.5549, 0, -0.5549, 0.5706, 0, -0.5706;
  sys.columns = {0, 1, 2, 3, 4, 5};
  sys.column_block = {0, 0, 1, 1, 2, 2};
  sys.labels = {"phi1:2", "phi1:3", "phi2:2", "phi2:3", "phi3:2", "phi3:3"};
  sys.active.assign(6, true);
  return sys;
}

GeneralSolution reference_solution(const StationaritySystem& sys) {
  GeneralSolution gs;
  gs.particular.resize(6);
  gs.particular << 0.5549, 0, 0, 0.5706, 0, 0;
  const NullspaceBasis ns = nullspace(sys.M);
  gs.basis = ns.basis;
  gs.rank = ns.rank;
  return gs;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("enum spellings") {
  CHECK(std::string(to_string(Verdict::removable)) == "removable");
  CHECK(parse_analysis_mode("logical") == AnalysisMode::logical);
  CHECK(parse_sign_convention("positive") == SignConvention::positive);
  CHECK_THROWS_AS(parse_sign_convention("other"), InputError);
}

TEST_CASE("two-point system: only the third rule can be switched off under λ >= 0") {
  const StationaritySystem sys = two_point_system();
  const GeneralSolution gs = reference_solution(sys);
  CHECK(gs.dimension() == 2);

  const auto third = deactivate(gs, sys, 2);
  REQUIRE(third);
  CHECK((third->lambda - gs.particular).cwiseAbs().maxCoeff() <= 1e-9);

  double phase_one = 0.0;
  CHECK_FALSE(deactivate(gs, sys, 0, {}, &phase_one));
  CHECK(phase_one > 0.0);
  CHECK_FALSE(deactivate(gs, sys, 1));

  // Without the sign constraint both have algebraic solutions.
  const auto first = relaxed_deactivation(gs, sys, 0);
  REQUIRE(first);
  CHECK((*first - vec({0, 0, -0.5549, 0.5706, 0.5549, 0})).cwiseAbs().maxCoeff() <= 1e-9);
  const auto second = relaxed_deactivation(gs, sys, 1);
  REQUIRE(second);
  CHECK((*second - vec({0.5549, -0.5706, 0, 0, 0, 0.5706})).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("solve_stationarity parameterises all solutions and rejects inconsistent systems") {
  const StationaritySystem sys = two_point_system();
  const GeneralSolution gs = solve_stationarity(sys.M, sys.target, sys.active);
  CHECK(gs.dimension() == 2);
  CHECK(gs.residual <= 1e-12);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd t = vec({g(rng), g(rng)});
    CHECK((sys.M * gs.at(t) - sys.target).cwiseAbs().maxCoeff() <= 1e-10);
  }
  // Inactive columns stay at zero for every t.
  std::vector<bool> active = sys.active;
  active[1] = false;
  const GeneralSolution part = solve_stationarity(sys.M, sys.target, active);
  CHECK(part.particular(1) == 0.0);
  CHECK(part.basis.row(1).isZero());

  Eigen::MatrixXd M(2, 1);
  M << 1, 0;
  try {
    solve_stationarity(M, vec({0, 1}), {true});
    FAIL("expected an inconsistent system");
  } catch (const InconsistentSystemError& e) {
    CHECK(e.residual() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(solve_stationarity(M, vec({0, 1, 2}), {true}), InputError);
}

TEST_CASE("one-point problem under both sign conventions") {
  const TrainingProblem tp = fixture("example4");
  const TrainedModel m = solve_primal(tp);
  const StationaritySystem lag = stationarity_system(tp, m, AnalysisMode::all, SignConvention::lagrangian);
  const StationaritySystem pap = stationarity_system(tp, m, AnalysisMode::all, SignConvention::positive);
  CHECK((lag.target + m.alpha()).isZero(1e-12));
  CHECK((pap.target - m.alpha()).isZero(1e-12));
  // The solver's own multipliers, halved, solve the Lagrangian system.
  CHECK((lag.M * (0.5 * m.mu) - lag.target).cwiseAbs().maxCoeff() <= 1e-9);

  AnalysisOptions o;
  o.ablation = true;
  const AnalysisReport rep = removable_constraints(tp, m, o);
  CHECK(rep.unique);
  for (const BlockAnalysis& b : rep.blocks) {
    CAPTURE(tp.blocks[b.block].id);
    REQUIRE(b.ablation);
    if (b.verdict == Verdict::removable) CHECK(b.ablation->p_distance <= 1e-7);
    if (b.verdict == Verdict::necessary) CHECK(b.ablation->p_distance > 1e-7);
  }
  CHECK(rep.blocks[4].verdict == Verdict::necessary);  // 1 - p2 <= 0
  CHECK(rep.blocks[4].ablation->loss_ablated == doctest::Approx(0.8));

  o.convention = SignConvention::positive;
  o.minimal_sets = true;
  const AnalysisReport prep = removable_constraints(tp, m, o);
  REQUIRE(prep.minimal_sets);
  CHECK(prep.minimal_sets->size() == 2);
  // The +alpha reading certifies 1 - p2 <= 0 although dropping it changes p.
  CHECK(prep.blocks[4].verdict == Verdict::removable);
  CHECK(prep.blocks[4].ablation->p_distance > 0.5);
}

TEST_CASE("minimal sets respect the size guard") {
  const TrainingProblem tp = fixture("example4");
  const TrainedModel m = solve_primal(tp);
  const StationaritySystem sys = stationarity_system(tp, m, AnalysisMode::all, SignConvention::lagrangian);
  CHECK_THROWS_AS(minimal_support_sets(sys, tp.tol, 3), ResourceLimitError);
  const auto sets = minimal_support_sets(sys, tp.tol);
  REQUIRE_FALSE(sets.empty());
  for (const SupportSet& s : sets) {
    CHECK((sys.M * s.lambda - sys.target).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(s.lambda.minCoeff() >= 0.0);
    CHECK(s.blocks.size() == sets.front().blocks.size());
  }
}

TEST_CASE("grounded entailment") {
  const TrainingProblem tp = fixture("example2");
  const auto phi3 = grounded_entailment(tp.blocks, 2, tp.index.size());
  CHECK(phi3.entailed);
  CHECK_FALSE(phi3.premises_infeasible);
  CHECK(phi3.piece_max.size() == tp.blocks[2].pieces.size());
  CHECK_FALSE(grounded_entailment(tp.blocks, 0, tp.index.size()).entailed);

  // Contradictory premises entail anything.
  SampleSets s;
  s.domains["S"] = {"S", {{"x1", {0.0}}}};
  const GroundingIndex idx = build_grounding_index({{"p", {"S"}, ""}, {"q", {"S"}, ""}}, s);
  std::vector<ConstraintBlock> blocks{pointwise_block({"p", {"x1"}, 1}, idx),
                                      pointwise_block({"p", {"x1"}, -1}, idx),
                                      pointwise_block({"q", {"x1"}, 1}, idx)};
  const auto vac = grounded_entailment(blocks, 2, idx.size());
  CHECK(vac.entailed);
  CHECK(vac.premises_infeasible);
}

TEST_CASE("logical mode folds the other families into the target") {
  const TrainingProblem tp = fixture("rule_vs_label");
  const TrainedModel m = solve_primal(tp);
  const StationaritySystem sys = stationarity_system(tp, m, AnalysisMode::logical, SignConvention::lagrangian);
  for (std::size_t b : sys.column_block) CHECK(tp.blocks[b].family == ConstraintFamily::logical);
  Eigen::VectorXd half_mu(static_cast<Eigen::Index>(sys.columns.size()));
  for (std::size_t i = 0; i < sys.columns.size(); ++i)
    half_mu(static_cast<Eigen::Index>(i)) = 0.5 * m.mu(static_cast<Eigen::Index>(sys.columns[i]));
  CHECK((sys.M * half_mu - sys.target).cwiseAbs().maxCoeff() <= 1e-9);

  AnalysisOptions o;
  o.mode = AnalysisMode::logical;
  const AnalysisReport rep = removable_constraints(tp, m, o);
  for (const BlockAnalysis& b : rep.blocks) {
    if (tp.blocks[b.block].family == ConstraintFamily::logical) {
      CHECK(b.analyzed);
      CHECK(b.verdict != Verdict::undetermined);
    } else {
      CHECK_FALSE(b.analyzed);
      CHECK(b.verdict == Verdict::undetermined);
      CHECK_FALSE(b.note.empty());
    }
  }
}

TEST_CASE("entailment takes precedence over the algebraic test") {
  const TrainingProblem tp = fixture("example2");
  const TrainedModel m = solve_primal(tp);
  AnalysisOptions o;
  o.entailment = true;
  o.ablation = true;
  const AnalysisReport rep = removable_constraints(tp, m, o);
  CHECK(rep.blocks[2].verdict == Verdict::entailed);
  CHECK(rep.blocks[2].ablation->p_distance <= 1e-7);
  CHECK(rep.blocks[2].ablation->ablated_feasible_for_full);
}

TEST_CASE("ablation record") {
  const TrainingProblem tp = fixture("example4");
  const AblationRecord r = ablate_and_compare(tp, 4);
  CHECK(r.block_id == "pw:p2:x1");
  CHECK(r.loss_full == doctest::Approx(1.6));
  CHECK(r.loss_ablated == doctest::Approx(0.8));
  CHECK(r.p_distance == doctest::Approx((r.p_full - r.p_ablated).cwiseAbs().maxCoeff()));
  CHECK_FALSE(r.ablated_feasible_for_full);
  CHECK(r.ablated_max_violation == doctest::Approx(1.0));
}

TEST_CASE("property: t-space deactivation agrees with a direct λ-space LP") {
  std::mt19937_64 rng(808);
  int problems = 0, certified = 0, refused = 0;
  for (int k = 0; k < 400 && problems < 30; ++k) {
    RandomProblemOptions o;
    o.max_points = 3;
    const TrainingProblem tp = assemble_problem(random_problem(rng, o));
    TrainedModel m;
    try {
      m = solve_primal(tp);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++problems;
    const StationaritySystem sys = stationarity_system(tp, m, AnalysisMode::all, SignConvention::lagrangian);
    const GeneralSolution gs = solve_stationarity(sys.M, sys.target, sys.active, tp.tol);
    for (std::size_t h = 0; h < tp.blocks.size(); ++h) {
      const auto cols = sys.block_columns(h);
      const auto via_t = deactivate(gs, sys, h, tp.tol);
      const auto via_lambda = oracle::lambda_space_certificate(sys.M, sys.target, sys.active, cols, 1e-9);
      CAPTURE(k);
      CAPTURE(tp.blocks[h].id);
      CHECK(via_t.has_value() == via_lambda.has_value());
      if (via_t) {
        ++certified;
        const Eigen::VectorXd& l = via_t->lambda;
        CHECK((sys.M * l - sys.target).cwiseAbs().maxCoeff() <= tp.tol.stationarity);
        CHECK(l.minCoeff() >= 0.0);
        for (std::size_t c : cols) CHECK(l(static_cast<Eigen::Index>(c)) == 0.0);
        for (std::size_t c = 0; c < sys.active.size(); ++c)
          if (!sys.active[c]) CHECK(l(static_cast<Eigen::Index>(c)) == 0.0);
      } else {
        ++refused;
      }
    }
  }
  CHECK(problems >= 20);
  CHECK(certified > 0);
  CHECK(refused > 0);
}
