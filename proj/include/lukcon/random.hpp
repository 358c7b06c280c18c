#pragma once

// Seeded generators of formulas and training problems for property checks.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "lukcon/grounding.hpp"
#include "lukcon/logic.hpp"
#include "lukcon/train.hpp"

namespace lukcon {

/// Terms are drawn from `variables` and `constants`; every variable left
/// free is closed by a leading universal quantifier.
struct FormulaShape {
  std::vector<PredicateDecl> predicates;
  std::vector<std::string> variables{"x", "y"};
  std::vector<std::string> constants;
  std::size_t max_depth = 4;
};

/// Any connective; quantifiers may also appear below the root, but never
/// under a negation when `nnf_safe` is set.
Formula random_formula(std::mt19937_64& rng, const FormulaShape& shape, bool nnf_safe = true);

/// A formula whose negation normal form lies in the concave fragment. The
/// source may still use ⊗, ∨ and ⇒ in positions where negation dualises
/// them into ∧ and ⊕.
Formula random_fragment_formula(std::mt19937_64& rng, const FormulaShape& shape);

struct RandomProblemOptions {
  std::size_t predicates = 3;
  std::size_t min_points = 1;
  std::size_t max_points = 4;
  std::size_t max_formulas = 3;
  std::size_t formula_depth = 2;
  double supervision_probability = 0.5;
  bool positive_definite = true;  // rbf kernels; otherwise linear with c = 0
};

/// Unary predicates p1..pJ on one domain of points in [0,1]^2, universally
/// quantified fragment formulas and random ±1 supervisions. The result may
/// be infeasible.
ProblemSpec random_problem(std::mt19937_64& rng, const RandomProblemOptions& opts = {});

}  // namespace lukcon
