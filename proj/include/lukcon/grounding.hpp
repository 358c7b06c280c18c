#pragma once

// Sample sets, predicate groundings and the global coordinate index of the
// concatenated grounding vector p = [p_1, ..., p_J].

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lukcon/logic.hpp"

namespace lukcon {

struct Sample {
  std::string name;
  std::vector<double> coords;
};

/// A named set of points. Samples are kept sorted by name.
struct Domain {
  std::string name;
  std::vector<Sample> samples;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> domains;  // one domain per argument position
  std::string kernel;                // kernel id; empty = shared default
};

struct Supervision {
  std::string predicate;
  std::vector<std::string> tuple;
  int label = 1;  // +1 or -1
};

using SampleTuple = std::vector<std::string>;

struct SampleSets {
  std::map<std::string, Domain> domains;
  /// Explicit grounding tuples per predicate; predicates not listed use the
  /// Cartesian product of their argument domains.
  std::map<std::string, std::vector<SampleTuple>> grounding_overrides;
  std::vector<Supervision> supervisions;
};

/// Bijection between (predicate j, tuple s) and global coordinates 0..S-1.
/// Predicates are laid out in declaration order, each slice holding its
/// tuples in lexicographic order of sample names.
class GroundingIndex {
 public:
  struct Slice {
    std::size_t offset = 0;
    std::size_t count = 0;
  };

  std::size_t size() const { return atoms_.size(); }
  std::size_t predicate_count() const { return decls_.size(); }

  const PredicateDecl& predicate(std::size_t j) const { return decls_[j]; }
  const std::vector<PredicateDecl>& predicates() const { return decls_; }
  std::optional<std::size_t> find_predicate(const std::string& name) const;

  Slice slice(std::size_t j) const { return slices_[j]; }
  const std::vector<SampleTuple>& tuples(std::size_t j) const { return tuples_[j]; }

  std::size_t to_global(std::size_t j, std::size_t s) const;
  std::pair<std::size_t, std::size_t> from_global(std::size_t k) const;

  std::optional<std::size_t> coordinate(const GroundAtom& a) const;
  const GroundAtom& atom(std::size_t k) const { return atoms_[k]; }

  /// "predicate:sample1[,sample2...]", e.g. "p2:x1,x2".
  std::string label(std::size_t k) const;

  /// Concatenated coordinates of tuple s of predicate j.
  const std::vector<double>& point(std::size_t j, std::size_t s) const {
    return points_[j][s];
  }
  /// Concatenated input dimension of predicate j.
  std::size_t input_dimension(std::size_t j) const { return dims_[j]; }

  const Domain& domain(const std::string& name) const;

 private:
  friend GroundingIndex build_grounding_index(const std::vector<PredicateDecl>&,
                                              const SampleSets&);

  std::vector<PredicateDecl> decls_;
  std::map<std::string, Domain> domains_;
  std::vector<Slice> slices_;
  std::vector<std::vector<SampleTuple>> tuples_;
  std::vector<std::vector<std::vector<double>>> points_;
  std::vector<std::size_t> dims_;
  std::vector<GroundAtom> atoms_;
  std::vector<std::size_t> owner_;  // coordinate -> predicate
  std::map<GroundAtom, std::size_t> lookup_;
};

/// Throws InputError for duplicate predicates, undeclared or empty domains,
/// unknown samples in overrides, supervised tuples outside the grounding set
/// and labels other than ±1.
GroundingIndex build_grounding_index(const std::vector<PredicateDecl>& decls,
                                     const SampleSets& samples);

/// A quantifier-free formula over global coordinates.
struct GroundFormula {
  enum class Kind { Literal, WeakConj, StrongDisj };

  Kind kind = Kind::Literal;
  std::size_t coordinate = 0;  // Literal only
  bool negated = false;        // Literal only
  std::vector<GroundFormula> children;

  static GroundFormula literal(std::size_t k, bool negated);

  bool operator==(const GroundFormula&) const = default;
};

/// Truth value of a ground formula at p (Table-1 semantics).
double eval_ground(const GroundFormula& g, std::span<const double> p);

/// Domain of each quantified variable, inferred from the argument positions
/// where it occurs. Conflicting positions raise InputError.
std::map<std::string, std::string> infer_variable_domains(const Formula& f,
                                                          const GroundingIndex& idx);

/// Replaces each maximal prefix of universal quantifiers by a weak
/// conjunction over the Cartesian product of the bound variables' domains
/// (exactly Π|domain| conjuncts, no symmetry pruning). The formula must be
/// closed and in the concave fragment.
GroundFormula expand_quantifiers(const NnfFormula& f, const GroundingIndex& idx);

/// Interpretation giving each grounded atom its value in p, with variable
/// ranges inferred for `f`; used to evaluate the source formula directly.
Interpretation make_interpretation(const Formula& f, const GroundingIndex& idx,
                                   std::span<const double> p);

}  // namespace lukcon
