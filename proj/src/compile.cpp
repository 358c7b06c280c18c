#include "lukcon/compile.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "lukcon/errors.hpp"

namespace lukcon {

SparseVector SparseVector::unit(std::size_t k, double value) {
  SparseVector v;
  if (value != 0.0) v.entries_.emplace_back(k, value);
  return v;
}

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector v;
  for (const Entry& e : entries) {
    if (!v.entries_.empty() && v.entries_.back().first == e.first)
      v.entries_.back().second += e.second;
    else
      v.entries_.push_back(e);
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

double SparseVector::dot(std::span<const double> p) const {
  double s = 0.0;
  for (const auto& [k, v] : entries_) s += v * p[k];
  return s;
}

double SparseVector::dot(const Eigen::VectorXd& p) const {
  return dot(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

Eigen::VectorXd SparseVector::dense(std::size_t dim) const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& [k, v] : entries_) d(static_cast<Eigen::Index>(k)) = v;
  return d;
}

SparseVector SparseVector::operator+(const SparseVector& other) const {
  SparseVector out;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      out.entries_.push_back(*a++);
    } else if (a == entries_.end() || b->first < a->first) {
      out.entries_.push_back(*b++);
    } else {
      const double s = a->second + b->second;
      if (s != 0.0) out.entries_.emplace_back(a->first, s);
      ++a;
      ++b;
    }
  }
  return out;
}

SparseVector SparseVector::operator-() const {
  SparseVector out = *this;
  for (auto& e : out.entries_) e.second = -e.second;
  return out;
}

double AffinePiece::box_minimum() const {
  double m = constant;
  for (const auto& [k, v] : coeffs.entries()) m += std::min(0.0, v);
  return m;
}

double AffineSet::min_value(std::span<const double> p) const {
  double m = std::numeric_limits<double>::infinity();
  for (const AffinePiece& a : pieces) m = std::min(m, a.eval(p));
  return m;
}

const char* to_string(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::logical: return "logical";
    case ConstraintFamily::pointwise: return "pointwise";
    case ConstraintFamily::consistency: return "consistency";
  }
  return "?";
}

double ConstraintBlock::max_value(std::span<const double> p) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const ConstraintPiece& c : pieces) m = std::max(m, c.eval(p));
  return m;
}

namespace {

void push_unique(std::vector<AffinePiece>& out, AffinePiece piece) {
  if (std::find(out.begin(), out.end(), piece) == out.end())
    out.push_back(std::move(piece));
}

AffineSet strong_disjunction(const AffineSet& lhs, const AffineSet& rhs) {
  AffineSet out;
  out.pieces.push_back(AffinePiece{SparseVector{}, 1.0});
  for (const AffinePiece& a : lhs.pieces)
    for (const AffinePiece& b : rhs.pieces) {
      AffinePiece sum{a.coeffs + b.coeffs, a.constant + b.constant};
      // min(1, ·) clamps anything that stays >= 1 on the unit box.
      if (sum.box_minimum() >= 1.0) continue;
      push_unique(out.pieces, std::move(sum));
    }
  return out;
}

}  // namespace

AffineSet compile_min_affine(const GroundFormula& g) {
  switch (g.kind) {
    case GroundFormula::Kind::Literal: {
      AffineSet s;
      if (g.negated)
        s.pieces.push_back({SparseVector::unit(g.coordinate, -1.0), 1.0});
      else
        s.pieces.push_back({SparseVector::unit(g.coordinate, 1.0), 0.0});
      return s;
    }
    case GroundFormula::Kind::WeakConj: {
      AffineSet s;
      for (const GroundFormula& c : g.children)
        for (AffinePiece& piece : compile_min_affine(c).pieces)
          push_unique(s.pieces, std::move(piece));
      if (s.pieces.empty()) throw InputError("empty conjunction");
      return s;
    }
    case GroundFormula::Kind::StrongDisj: {
      if (g.children.empty()) throw InputError("empty strong disjunction");
      AffineSet acc = compile_min_affine(g.children.front());
      for (std::size_t i = 1; i < g.children.size(); ++i)
        acc = strong_disjunction(acc, compile_min_affine(g.children[i]));
      return acc;
    }
  }
  throw InputError("unknown ground node");
}

ConstraintBlock to_constraint_block(const AffineSet& set, std::string id,
                                    std::string source) {
  ConstraintBlock b;
  b.id = std::move(id);
  b.family = ConstraintFamily::logical;
  b.source = std::move(source);
  b.pieces.reserve(set.pieces.size());
  for (const AffinePiece& a : set.pieces)
    b.pieces.push_back({-a.coeffs, 1.0 - a.constant});
  return b;
}

ConstraintBlock compile_formula(const Formula& f, const GroundingIndex& idx,
                                std::string id, std::string source) {
  const NnfFormula nnf = to_nnf(f);
  const FragmentReport report = check_concave_fragment(nnf);
  if (!report.is_concave_fragment)
    throw InputError("formula '" + (source.empty() ? print_formula(f) : source) +
                     "' uses '" + report.offending_connective +
                     "' outside the concave fragment (∧, ⊕)");
  if (source.empty()) source = print_formula(f);
  return to_constraint_block(compile_min_affine(expand_quantifiers(nnf, idx)),
                             std::move(id), std::move(source));
}

ConstraintBlock pointwise_block(const Supervision& sv, const GroundingIndex& idx) {
  if (sv.label != 1 && sv.label != -1)
    throw InputError("supervision label must be +1 or -1");
  const auto k = idx.coordinate(GroundAtom{sv.predicate, sv.tuple});
  if (!k) throw InputError("supervised atom is not grounded");
  const std::string name = idx.label(*k);
  ConstraintBlock b;
  b.id = "pw:" + name;
  b.family = ConstraintFamily::pointwise;
  if (sv.label == 1) {
    b.pieces.push_back({SparseVector::unit(*k, -1.0), 1.0});
    b.source = "1 - " + name + " <= 0";
  } else {
    b.pieces.push_back({SparseVector::unit(*k, 1.0), 0.0});
    b.source = name + " <= 0";
  }
  return b;
}

std::vector<ConstraintBlock> consistency_blocks(const GroundingIndex& idx) {
  std::vector<ConstraintBlock> out;
  out.reserve(2 * idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::string name = idx.label(k);
    out.push_back({"lo:" + name, ConstraintFamily::consistency,
                   {{SparseVector::unit(k, -1.0), 0.0}}, "-" + name + " <= 0"});
    out.push_back({"hi:" + name, ConstraintFamily::consistency,
                   {{SparseVector::unit(k, 1.0), -1.0}}, name + " - 1 <= 0"});
  }
  return out;
}

ConstraintMatrix assemble_M(const std::vector<ConstraintBlock>& blocks,
                            std::size_t dimension, ConstantPieces constants) {
  ConstraintMatrix cm;
  cm.block_columns.resize(blocks.size());
  std::vector<const ConstraintPiece*> kept;
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    for (std::size_t i = 0; i < blocks[h].pieces.size(); ++i) {
      const ConstraintPiece& piece = blocks[h].pieces[i];
      for (const auto& [k, v] : piece.row.entries())
        if (k >= dimension)
          throw InputError("block '" + blocks[h].id + "' references coordinate " +
                           std::to_string(k) + " but S = " + std::to_string(dimension));
      if (constants == ConstantPieces::drop && piece.is_constant() && piece.offset <= 0.0)
        continue;
      cm.block_columns[h].push_back(kept.size());
      cm.column_block.push_back(h);
      cm.column_piece.push_back(i);
      cm.labels.push_back(blocks[h].id + ":" + std::to_string(i + 1));
      kept.push_back(&piece);
    }
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  cm.M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension), n);
  cm.q = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (const auto& [k, v] : kept[c]->row.entries())
      cm.M(static_cast<Eigen::Index>(k), c) = v;
    cm.q(c) = kept[c]->offset;
  }
  return cm;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace {

// Tuple labels contain commas, so such fields are quoted.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

std::string matrix_csv(const ConstraintMatrix& cm, const GroundingIndex& idx) {
  std::string out = "coord";
  for (const std::string& l : cm.labels) out += "," + csv_field(l);
  out += '\n';
  for (Eigen::Index r = 0; r < cm.M.rows(); ++r) {
    out += csv_field(idx.label(static_cast<std::size_t>(r)));
    for (Eigen::Index c = 0; c < cm.M.cols(); ++c) out += "," + format_double(cm.M(r, c));
    out += '\n';
  }
  out += "q";
  for (Eigen::Index c = 0; c < cm.q.size(); ++c) out += "," + format_double(cm.q(c));
  out += '\n';
  return out;
}

}  // namespace lukcon
