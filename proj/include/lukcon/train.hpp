#pragma once

// Training of kernel machines under compiled hard constraints: the primal QP
// over kernel-expansion coefficients and prediction by kernel expansion.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lukcon/compile.hpp"
#include "lukcon/grounding.hpp"
#include "lukcon/kernels.hpp"
#include "lukcon/tolerances.hpp"

namespace lukcon {

struct FormulaSpec {
  std::string id;
  std::string text;
};

/// Everything an experiment needs, as read from a problem file.
struct ProblemSpec {
  std::vector<PredicateDecl> predicates;
  SampleSets samples;
  std::map<std::string, KernelSpec> kernels;  // "default" is the fallback
  std::vector<FormulaSpec> formulas;
  bool bias = false;
  Tolerances tol;
};

/// The kernel bound to `decl`: its own id, else "default", else linear c=1.
KernelSpec resolve_kernel(const ProblemSpec& spec, const PredicateDecl& decl);

struct TrainingProblem {
  GroundingIndex index;
  /// Logical blocks in formula order, pointwise blocks in supervision order,
  /// then the consistency pair of every coordinate.
  std::vector<ConstraintBlock> blocks;
  ConstraintMatrix matrix;  // constant pieces with q <= 0 dropped
  std::vector<KernelSpec> kernels;  // per predicate
  std::vector<GramMatrix> grams;    // per predicate
  bool bias = false;
  Tolerances tol;

  std::optional<std::size_t> find_block(const std::string& id) const;
  /// blockdiag(K_1, ..., K_J).
  Eigen::MatrixXd gram_block() const;
  /// True when every K_j is positive-definite and the bias is off, so the
  /// optimal grounding vector is unique.
  bool unique_optimum() const;
};

/// Parses and compiles every formula, builds pointwise and consistency
/// blocks and the Gram matrices. Throws InputError on any inconsistency.
TrainingProblem assemble_problem(const ProblemSpec& spec);

TrainingProblem make_training_problem(GroundingIndex index,
                                      std::vector<ConstraintBlock> blocks,
                                      std::vector<KernelSpec> kernels, bool bias,
                                      const Tolerances& tol);

/// The same problem with block `h` removed.
TrainingProblem without_block(const TrainingProblem& tp, std::size_t h);

struct PredicateModel {
  std::string name;
  KernelSpec kernel;
  std::vector<std::vector<double>> points;  // concatenated tuple coordinates
  std::vector<std::string> tuple_labels;    // grounding labels, same order
  Eigen::VectorXd alpha;
  double bias = 0.0;
};

struct TrainedModel {
  std::vector<PredicateModel> predicates;
  Eigen::VectorXd p;          // optimal grounding vector
  double loss = 0.0;          // sum_j alpha_j' K_j alpha_j
  std::vector<bool> active;   // per column of the constraint matrix
  Eigen::VectorXd mu;         // solver multipliers per column (diagnostic)
  bool unique = false;
  double stationarity = 0.0;  // QP KKT residuals
  double feasibility = 0.0;
  double slackness = 0.0;
  double max_violation = 0.0;  // max(M'p + q) over all columns
  int iterations = 0;

  /// concat(alpha_j).
  Eigen::VectorXd alpha() const;
};

/// Solves min sum_j alpha_j'K_j alpha_j s.t. every piece of every block
/// holds at p = blockdiag(K) alpha (+ bias). Alpha is reported in the
/// multiplier form -½ M mu. Throws InfeasibleError with the phase-1 value.
TrainedModel solve_primal(const TrainingProblem& tp);

/// sum_s alpha_s k(x_s, x) + bias. Throws InputError on dimension mismatch.
double predict(const PredicateModel& m, std::span<const double> x);
double predict(const TrainedModel& m, std::size_t j, std::span<const double> x);

/// Recomputes sum_j alpha_j' K_j alpha_j from the stored points.
double loss(const TrainedModel& m);

}  // namespace lukcon
