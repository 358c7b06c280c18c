#include <doctest.h>

#include <random>

#include "lukcon/errors.hpp"
#include "lukcon/problem_file.hpp"
#include "lukcon/random.hpp"
#include "lukcon/train.hpp"

using namespace lukcon;

namespace {

const std::string kFixtures = LUKCON_FIXTURES;

TrainingProblem fixture(const std::string& name) {
  return assemble_problem(load_problem(kFixtures + "/" + name + ".json"));
}

// Every property the training result must satisfy, recomputed from the
// problem data.
void check_invariants(const TrainingProblem& tp, const TrainedModel& m) {
  const Eigen::MatrixXd K = tp.gram_block();
  const Eigen::VectorXd a = m.alpha();
  // Without bias the grounding vector is the kernel expansion itself.
  if (!tp.bias) CHECK((K * a - m.p).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(m.loss == doctest::Approx(a.dot(K * a)).epsilon(1e-9));
  CHECK(m.loss == doctest::Approx(loss(m)).epsilon(1e-9));
  const Eigen::VectorXd slack = tp.matrix.M.transpose() * m.p + tp.matrix.q;
  CHECK(slack.maxCoeff() <= tp.tol.feasibility);
  CHECK(m.max_violation == doctest::Approx(slack.maxCoeff()));
  CHECK((a + 0.5 * tp.matrix.M * m.mu).cwiseAbs().maxCoeff() <= 1e-9);
  for (Eigen::Index c = 0; c < m.mu.size(); ++c) {
    CHECK(m.mu(c) >= 0.0);
    CHECK(m.active[static_cast<std::size_t>(c)] == (std::abs(slack(c)) <= tp.tol.activity));
    if (!m.active[static_cast<std::size_t>(c)]) CHECK(m.mu(c) == 0.0);
  }
}

}  // namespace

TEST_CASE("one-point transitive problem") {
  const TrainingProblem tp = fixture("example4");
  CHECK(tp.blocks.size() == 12);
  CHECK(tp.matrix.cols() == 12);
  CHECK(tp.unique_optimum());
  const TrainedModel m = solve_primal(tp);
  CHECK(m.alpha()(0) == doctest::Approx(0.0));
  CHECK(m.alpha()(1) == doctest::Approx(0.8));
  CHECK(m.alpha()(2) == doctest::Approx(0.8));
  CHECK(m.p(1) == doctest::Approx(1.0));
  CHECK(m.loss == doctest::Approx(1.6));
  CHECK(m.unique);
  const std::vector<double> x{0.4, 0.3};
  CHECK(predict(m, 1, x) == doctest::Approx(1.0));
  CHECK(predict(m, 0, x) == doctest::Approx(0.0));
  CHECK_THROWS_AS(predict(m, 1, std::vector<double>{0.4}), InputError);
  check_invariants(tp, m);
}

TEST_CASE("block order: logical, pointwise, consistency") {
  const TrainingProblem tp = fixture("example4");
  const std::vector<std::string> ids{"phi1", "phi2", "phi3", "pw:p1:x1", "pw:p2:x1", "pw:p3:x1",
                                     "lo:p1:x1", "hi:p1:x1", "lo:p2:x1", "hi:p2:x1", "lo:p3:x1", "hi:p3:x1"};
  for (std::size_t h = 0; h < ids.size(); ++h) CHECK(tp.blocks[h].id == ids[h]);
  CHECK(tp.find_block("pw:p2:x1") == 4u);
  CHECK_FALSE(tp.find_block("nope"));
}

TEST_CASE("bias breaks uniqueness and still trains") {
  ProblemSpec spec = load_problem(kFixtures + "/example4.json");
  spec.bias = true;
  const TrainingProblem tp = assemble_problem(spec);
  CHECK_FALSE(tp.unique_optimum());
  const TrainedModel m = solve_primal(tp);
  CHECK_FALSE(m.unique);
  // A free bias reaches the labels with no kernel weight at all.
  CHECK(m.loss <= 1e-9);
  CHECK(m.max_violation <= tp.tol.feasibility);
}

TEST_CASE("removing a block") {
  const TrainingProblem tp = fixture("example4");
  const TrainingProblem r = without_block(tp, 4);
  CHECK(r.blocks.size() == 11);
  CHECK_FALSE(r.find_block("pw:p2:x1"));
  CHECK(r.matrix.cols() == 11);
  CHECK(solve_primal(r).loss == doctest::Approx(0.8));
}

TEST_CASE("contradictory labels are infeasible with a certificate") {
  try {
    solve_primal(fixture("infeasible"));
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.phase_one_value() > 1e-9);
  }
}

TEST_CASE("input errors while assembling") {
  ProblemSpec spec = load_problem(kFixtures + "/example4.json");
  ProblemSpec dup_formula = spec;
  dup_formula.formulas[1].id = "same";
  dup_formula.formulas[2].id = "same";
  CHECK_THROWS_AS(assemble_problem(dup_formula), InputError);
  ProblemSpec dup_label = spec;
  dup_label.samples.supervisions.push_back(dup_label.samples.supervisions[0]);
  CHECK_THROWS_AS(assemble_problem(dup_label), InputError);
  ProblemSpec outside = spec;
  outside.formulas.push_back({"bad", "forall x: p1(x) | p2(x)"});
  CHECK_THROWS_AS(assemble_problem(outside), InputError);
}

TEST_CASE("kernel resolution") {
  ProblemSpec spec = load_problem(kFixtures + "/example4.json");
  spec.kernels["wide"] = KernelSpec{KernelKind::rbf, 0.0, 1, 2.0};
  spec.predicates[1].kernel = "wide";
  CHECK(resolve_kernel(spec, spec.predicates[1]).kind == KernelKind::rbf);
  CHECK(resolve_kernel(spec, spec.predicates[0]).kind == KernelKind::linear);
  spec.kernels.clear();
  spec.predicates[1].kernel.clear();
  const KernelSpec fallback = resolve_kernel(spec, spec.predicates[0]);
  CHECK(fallback.kind == KernelKind::linear);
  CHECK(fallback.offset == 1.0);
}

TEST_CASE("fixtures train and satisfy the invariants") {
  for (const char* name : {"example1", "example2", "example3", "rule_vs_label"}) {
    CAPTURE(name);
    const TrainingProblem tp = fixture(name);
    check_invariants(tp, solve_primal(tp));
  }
}

TEST_CASE("property: invariants on random problems") {
  std::mt19937_64 rng(55);
  int feasible = 0;
  for (int k = 0; k < 200 && feasible < 40; ++k) {
    RandomProblemOptions o;
    o.positive_definite = k % 3 != 0;
    const TrainingProblem tp = assemble_problem(random_problem(rng, o));
    TrainedModel m;
    try {
      m = solve_primal(tp);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++feasible;
    CAPTURE(k);
    check_invariants(tp, m);
    CHECK(m.unique == tp.unique_optimum());
  }
  CHECK(feasible >= 20);
}
