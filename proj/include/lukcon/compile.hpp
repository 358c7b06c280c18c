#pragma once

// Compilation of grounded concave-fragment formulas, supervisions and
// [0,1] consistency requirements into affine constraint pieces
// M_{h,i}·p + q_{h,i} <= 0, and assembly of the global matrix M.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lukcon/grounding.hpp"
#include "lukcon/logic.hpp"

namespace lukcon {

/// Sparse vector over grounding coordinates; entries sorted by index, no
/// explicit zeros.
class SparseVector {
 public:
  using Entry = std::pair<std::size_t, double>;

  SparseVector() = default;
  static SparseVector unit(std::size_t k, double value);
  /// Takes arbitrary entries; sorts, merges duplicates and drops zeros.
  static SparseVector from_entries(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double dot(std::span<const double> p) const;
  double dot(const Eigen::VectorXd& p) const;
  Eigen::VectorXd dense(std::size_t dim) const;

  SparseVector operator+(const SparseVector& other) const;
  SparseVector operator-() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Affine function coeffs·p + constant.
struct AffinePiece {
  SparseVector coeffs;
  double constant = 0.0;

  double eval(std::span<const double> p) const { return coeffs.dot(p) + constant; }
  /// Minimum over the unit box [0,1]^S.
  double box_minimum() const;

  bool operator==(const AffinePiece&) const = default;
};

/// Concave piecewise-linear function: the minimum of its pieces.
struct AffineSet {
  std::vector<AffinePiece> pieces;

  double min_value(std::span<const double> p) const;
};

enum class ConstraintFamily { logical, pointwise, consistency };

const char* to_string(ConstraintFamily f);

/// One linear piece of a block: row·p + offset <= 0.
struct ConstraintPiece {
  SparseVector row;
  double offset = 0.0;

  double eval(std::span<const double> p) const { return row.dot(p) + offset; }
  bool is_constant() const { return row.empty(); }

  bool operator==(const ConstraintPiece&) const = default;
};

/// A constraint max_i (M_{h,i}·p + q_{h,i}) <= 0.
struct ConstraintBlock {
  std::string id;
  ConstraintFamily family = ConstraintFamily::logical;
  std::vector<ConstraintPiece> pieces;
  std::string source;

  double max_value(std::span<const double> p) const;
};

/// Rules: positive literal k ↦ {e_k}; negated ↦ {1 - e_k}; ∧ ↦ union;
/// ⊕ ↦ {1} ∪ {a + b}, where sums that cannot fall below 1 on the unit box
/// are absorbed by the constant 1. Exact duplicates are removed, first
/// occurrence wins.
AffineSet compile_min_affine(const GroundFormula& g);

/// Emits (-a, 1 - c) for each piece (a, c): 1 - f(p) <= 0. Constant pieces
/// are kept.
ConstraintBlock to_constraint_block(const AffineSet& set, std::string id,
                                    std::string source = {});

/// NNF, fragment check, quantifier expansion and compilation in one step.
ConstraintBlock compile_formula(const Formula& f, const GroundingIndex& idx,
                                std::string id, std::string source = {});

/// Label +1 ↦ 1 - p <= 0, label -1 ↦ p <= 0.
ConstraintBlock pointwise_block(const Supervision& sv, const GroundingIndex& idx);

/// Two one-piece blocks per coordinate: -p <= 0 then p - 1 <= 0.
std::vector<ConstraintBlock> consistency_blocks(const GroundingIndex& idx);

enum class ConstantPieces {
  keep,  // every piece becomes a column (zero columns included)
  drop,  // pieces with no coordinate dependence and q <= 0 are omitted
};

/// M ∈ R^{S×N} with one column per retained piece, in block then piece order.
struct ConstraintMatrix {
  Eigen::MatrixXd M;
  Eigen::VectorXd q;
  std::vector<std::string> labels;        // "<block id>:<1-based piece>"
  std::vector<std::size_t> column_block;  // column -> block index
  std::vector<std::size_t> column_piece;  // column -> piece index in block
  std::vector<std::vector<std::size_t>> block_columns;  // block -> columns

  std::size_t rows() const { return static_cast<std::size_t>(M.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(M.cols()); }
};

/// Throws InputError when a piece references a coordinate >= `dimension`.
ConstraintMatrix assemble_M(const std::vector<ConstraintBlock>& blocks,
                            std::size_t dimension,
                            ConstantPieces constants = ConstantPieces::drop);

/// CSV: header "coord,<labels...>", one row per coordinate (grounding
/// label), then a trailing "q" row. Shortest round-trip decimal output.
std::string matrix_csv(const ConstraintMatrix& cm, const GroundingIndex& idx);

/// Shortest decimal text that parses back to the same binary64 value.
std::string format_double(double v);

}  // namespace lukcon
