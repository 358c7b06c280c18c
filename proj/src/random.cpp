#include "lukcon/random.hpp"

#include <algorithm>
#include <set>

#include "lukcon/errors.hpp"

namespace lukcon {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

void free_vars(const Formula& f, const std::set<std::string>& vars, std::set<std::string>& bound,
               std::vector<std::string>& out) {
  if (f.kind == Connective::Atom) {
    for (const std::string& t : f.args)
      if (vars.count(t) && !bound.count(t) &&
          std::find(out.begin(), out.end(), t) == out.end())
        out.push_back(t);
    return;
  }
  if (f.kind == Connective::Forall) {
    const bool fresh = bound.insert(f.name).second;
    free_vars(f.children[0], vars, bound, out);
    if (fresh) bound.erase(f.name);
    return;
  }
  for (const Formula& c : f.children) free_vars(c, vars, bound, out);
}

std::vector<std::string> free_vars(const Formula& f, const FormulaShape& shape) {
  std::set<std::string> vars(shape.variables.begin(), shape.variables.end());
  std::set<std::string> bound;
  std::vector<std::string> out;
  free_vars(f, vars, bound, out);
  return out;
}

Formula random_atom(std::mt19937_64& rng, const FormulaShape& shape) {
  if (shape.predicates.empty()) throw InputError("formula shape has no predicates");
  const PredicateDecl& p = shape.predicates[pick(rng, shape.predicates.size())];
  std::vector<std::string> terms;
  const std::size_t nterms = shape.variables.size() + shape.constants.size();
  for (std::size_t i = 0; i < p.domains.size(); ++i) {
    const std::size_t k = pick(rng, nterms);
    terms.push_back(k < shape.variables.size() ? shape.variables[k]
                                               : shape.constants[k - shape.variables.size()]);
  }
  return Formula::atom(p.name, std::move(terms));
}

// Renames the free occurrences of `from`.
void rename_free(Formula& f, const std::string& from, const std::string& to) {
  if (f.kind == Connective::Atom) {
    for (std::string& t : f.args)
      if (t == from) t = to;
    return;
  }
  if (f.kind == Connective::Forall && f.name == from) return;
  for (Formula& c : f.children) rename_free(c, from, to);
}

Formula close_over(Formula f, const std::vector<std::string>& vars) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = Formula::forall(*it, std::move(f));
  return f;
}

Formula any_node(std::mt19937_64& rng, const FormulaShape& shape, std::size_t depth,
                 bool nnf_safe, bool under_neg, std::size_t& binders) {
  if (depth == 0 || coin(rng, 0.25)) return random_atom(rng, shape);
  static constexpr Connective kBinary[] = {Connective::StrongConj, Connective::StrongDisj,
                                           Connective::WeakConj,   Connective::WeakDisj,
                                           Connective::Implies};
  Formula f;
  if (coin(rng, 0.2)) {
    f = Formula::neg(any_node(rng, shape, depth - 1, nnf_safe, true, binders));
  } else {
    const Connective c = kBinary[pick(rng, std::size(kBinary))];
    // The antecedent of an implication ends up negated.
    const bool lhs_neg = under_neg || c == Connective::Implies;
    Formula lhs = any_node(rng, shape, depth - 1, nnf_safe, lhs_neg, binders);
    Formula rhs = any_node(rng, shape, depth - 1, nnf_safe, under_neg, binders);
    f = Formula::binary(c, std::move(lhs), std::move(rhs));
  }
  if (!(nnf_safe && under_neg) && coin(rng, 0.2)) {
    const auto fv = free_vars(f, shape);
    if (!fv.empty()) {
      // A fresh name keeps every binder distinct along any path.
      const std::string fresh = "u" + std::to_string(++binders);
      rename_free(f, fv[pick(rng, fv.size())], fresh);
      f = Formula::forall(fresh, std::move(f));
    }
  }
  return f;
}

// positive: the node survives un-negated in NNF; it must become ∧, ⊕ or a
// literal. negative: the node is negated in NNF, so ⊗ and ∨ are admissible.
Formula fragment_node(std::mt19937_64& rng, const FormulaShape& shape, std::size_t depth,
                      bool positive) {
  if (depth == 0 || coin(rng, 0.25)) return random_atom(rng, shape);
  const std::size_t choice = pick(rng, positive ? 4 : 3);
  // Children are drawn in a fixed order so a seed yields one formula.
  auto pair = [&](Connective c, bool lhs_positive, bool rhs_positive) {
    Formula lhs = fragment_node(rng, shape, depth - 1, lhs_positive);
    Formula rhs = fragment_node(rng, shape, depth - 1, rhs_positive);
    return Formula::binary(c, std::move(lhs), std::move(rhs));
  };
  if (positive) {
    switch (choice) {
      case 0: return pair(Connective::WeakConj, true, true);
      case 1: return pair(Connective::StrongDisj, true, true);
      case 2: return pair(Connective::Implies, false, true);
      default: return Formula::neg(fragment_node(rng, shape, depth - 1, false));
    }
  }
  switch (choice) {
    case 0: return pair(Connective::StrongConj, false, false);
    case 1: return pair(Connective::WeakDisj, false, false);
    default: return Formula::neg(fragment_node(rng, shape, depth - 1, true));
  }
}

}  // namespace

Formula random_formula(std::mt19937_64& rng, const FormulaShape& shape, bool nnf_safe) {
  std::size_t binders = 0;
  Formula f = any_node(rng, shape, shape.max_depth, nnf_safe, false, binders);
  return close_over(std::move(f), free_vars(f, shape));
}

Formula random_fragment_formula(std::mt19937_64& rng, const FormulaShape& shape) {
  Formula f = fragment_node(rng, shape, shape.max_depth, true);
  return close_over(std::move(f), free_vars(f, shape));
}

ProblemSpec random_problem(std::mt19937_64& rng, const RandomProblemOptions& opts) {
  if (opts.predicates == 0 || opts.min_points == 0 || opts.max_points < opts.min_points)
    throw InputError("random problem: invalid options");
  ProblemSpec spec;
  const std::size_t n =
      std::uniform_int_distribution<std::size_t>(opts.min_points, opts.max_points)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Domain d{"S", {}};
  for (std::size_t i = 0; i < n; ++i)
    d.samples.push_back({"x" + std::to_string(i + 1), {unit(rng), unit(rng)}});
  spec.samples.domains["S"] = d;

  for (std::size_t j = 0; j < opts.predicates; ++j)
    spec.predicates.push_back({"p" + std::to_string(j + 1), {"S"}, ""});

  KernelSpec k;
  if (opts.positive_definite) {
    k.kind = KernelKind::rbf;
    k.width = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
  } else {
    k.kind = KernelKind::linear;
    k.offset = 0.0;
  }
  spec.kernels["default"] = k;

  FormulaShape shape;
  shape.predicates = spec.predicates;
  shape.variables = {"x"};
  shape.max_depth = opts.formula_depth;
  const std::size_t nf = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, opts.max_formulas))(rng);
  for (std::size_t i = 0; i < nf; ++i) {
    Formula f = random_fragment_formula(rng, shape);
    spec.formulas.push_back({"phi" + std::to_string(i + 1), print_formula(f)});
  }

  for (const PredicateDecl& p : spec.predicates)
    for (const Sample& s : d.samples)
      if (coin(rng, opts.supervision_probability))
        spec.samples.supervisions.push_back({p.name, {s.name}, coin(rng, 0.5) ? 1 : -1});
  return spec;
}

}  // namespace lukcon
