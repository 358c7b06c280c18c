#pragma once

// Łukasiewicz formulas over [0,1]: AST, concrete syntax, negation normal
// form, concave-fragment check and truth-functional evaluation.

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lukcon {

enum class Connective {
  Atom,
  Neg,
  StrongConj,  // ⊗  max(0, x+y-1)
  StrongDisj,  // ⊕  min(1, x+y)
  WeakConj,    // ∧  min(x, y)
  WeakDisj,    // ∨  max(x, y)
  Implies,     // ⇒  min(1, 1-x+y)
  Forall,
};

const char* to_string(Connective c);

/// A first-order Łukasiewicz formula. Binary connectives have exactly two
/// children, Neg and Forall exactly one, Atom none.
///
/// For Atom, `name` is the predicate and `args` the terms; a term is either a
/// variable bound by an enclosing Forall or the name of a sample. For Forall,
/// `name` is the bound variable.
struct Formula {
  Connective kind = Connective::Atom;
  std::string name;
  std::vector<std::string> args;
  std::vector<Formula> children;

  static Formula atom(std::string predicate, std::vector<std::string> terms);
  static Formula neg(Formula f);
  static Formula binary(Connective c, Formula lhs, Formula rhs);
  static Formula forall(std::string variable, Formula body);

  bool is_binary() const;

  bool operator==(const Formula&) const = default;
};

/// Predicate name -> arity.
using Signature = std::map<std::string, std::size_t>;

/// Parses the ASCII syntax: `~` ¬, `*` ⊗, `+` ⊕, `&` ∧, `|` ∨, `->` ⇒
/// (right associative), `forall v:`. Binary operators other than `->` are
/// left associative. Unknown predicates and arity mismatches against `sig`
/// are reported as InputError, malformed text as SyntaxError.
Formula parse_formula(std::string_view text, const Signature& sig);

/// Same, without a declared signature: only checks that each predicate is
/// used with a single arity.
Formula parse_formula(std::string_view text);

/// Prints in the concrete syntax; parse_formula(print_formula(f)) == f.
std::string print_formula(const Formula& f);

/// A formula whose negations sit directly on atoms and that has no Implies.
class NnfFormula {
 public:
  const Formula& formula() const { return f_; }
  bool operator==(const NnfFormula&) const = default;

 private:
  friend NnfFormula to_nnf(const Formula& f);
  explicit NnfFormula(Formula f) : f_(std::move(f)) {}
  Formula f_;
};

/// Eliminates Implies (a⇒b ↦ ¬a ⊕ b), pushes negations to atoms using the
/// dualities ⊗↔⊕ and ∧↔∨, and removes double negations. A negated
/// quantifier would need an existential and raises InputError.
NnfFormula to_nnf(const Formula& f);

struct FragmentReport {
  bool is_concave_fragment = true;
  /// Child-index path from the root to the first offending node.
  std::vector<std::size_t> offending_path;
  std::string offending_connective;
};

/// True iff every internal connective is ∧, ⊕ or ∀ (negation only on atoms).
FragmentReport check_concave_fragment(const NnfFormula& f);

/// Sample-level atom, e.g. p2(x1, x2).
struct GroundAtom {
  std::string predicate;
  std::vector<std::string> samples;
  auto operator<=>(const GroundAtom&) const = default;
};

/// Truth values for ground atoms plus the ranges of quantified variables.
/// A variable missing from `variable_domains` ranges over `universe`.
struct Interpretation {
  std::map<GroundAtom, double> values;
  std::map<std::string, std::vector<std::string>> variable_domains;
  std::vector<std::string> universe;
};

/// Table-1 semantics; Forall is the minimum over its groundings. Throws
/// InputError when a required atom has no value.
double eval_lukasiewicz(const Formula& f, const Interpretation& interp);

// Table-1 connectives on scalars.
double luk_neg(double x);
double luk_strong_conj(double x, double y);
double luk_strong_disj(double x, double y);
double luk_weak_conj(double x, double y);
double luk_weak_disj(double x, double y);
double luk_implies(double x, double y);

}  // namespace lukcon
