#include "lukcon/grounding.hpp"

#include <algorithm>
#include <set>

#include "lukcon/errors.hpp"

namespace lukcon {

namespace {

std::string tuple_text(const SampleTuple& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += t[i];
  }
  return s;
}

bool domain_has(const Domain& d, const std::string& sample) {
  return std::any_of(d.samples.begin(), d.samples.end(),
                     [&](const Sample& s) { return s.name == sample; });
}

const Sample& domain_sample(const Domain& d, const std::string& sample) {
  for (const Sample& s : d.samples)
    if (s.name == sample) return s;
  throw InputError("sample '" + sample + "' not in domain '" + d.name + "'");
}

}  // namespace

std::optional<std::size_t> GroundingIndex::find_predicate(const std::string& name) const {
  for (std::size_t j = 0; j < decls_.size(); ++j)
    if (decls_[j].name == name) return j;
  return std::nullopt;
}

std::size_t GroundingIndex::to_global(std::size_t j, std::size_t s) const {
  if (j >= slices_.size() || s >= slices_[j].count)
    throw InputError("grounding (" + std::to_string(j) + ", " + std::to_string(s) +
                     ") out of range");
  return slices_[j].offset + s;
}

std::pair<std::size_t, std::size_t> GroundingIndex::from_global(std::size_t k) const {
  if (k >= atoms_.size())
    throw InputError("coordinate " + std::to_string(k) + " out of range");
  const std::size_t j = owner_[k];
  return {j, k - slices_[j].offset};
}

std::optional<std::size_t> GroundingIndex::coordinate(const GroundAtom& a) const {
  auto it = lookup_.find(a);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::string GroundingIndex::label(std::size_t k) const {
  const GroundAtom& a = atoms_.at(k);
  return a.predicate + ":" + tuple_text(a.samples);
}

const Domain& GroundingIndex::domain(const std::string& name) const {
  auto it = domains_.find(name);
  if (it == domains_.end()) throw InputError("unknown domain '" + name + "'");
  return it->second;
}

GroundingIndex build_grounding_index(const std::vector<PredicateDecl>& decls,
                                     const SampleSets& samples) {
  GroundingIndex idx;
  idx.decls_ = decls;
  idx.domains_ = samples.domains;
  for (auto& [name, d] : idx.domains_) {
    std::sort(d.samples.begin(), d.samples.end(),
              [](const Sample& a, const Sample& b) { return a.name < b.name; });
    for (std::size_t i = 1; i < d.samples.size(); ++i)
      if (d.samples[i].name == d.samples[i - 1].name)
        throw InputError("duplicate sample '" + d.samples[i].name + "' in domain '" +
                         name + "'");
  }

  std::set<std::string> names;
  for (const PredicateDecl& p : decls) {
    if (!names.insert(p.name).second)
      throw InputError("duplicate predicate '" + p.name + "'");
    if (p.domains.empty())
      throw InputError("predicate '" + p.name + "' must have arity >= 1");
    for (const std::string& d : p.domains) {
      auto it = idx.domains_.find(d);
      if (it == idx.domains_.end())
        throw InputError("predicate '" + p.name + "' references unknown domain '" +
                         d + "'");
      if (it->second.samples.empty())
        throw InputError("domain '" + d + "' has no samples");
    }
  }
  for (const auto& [pred, _] : samples.grounding_overrides)
    if (!names.count(pred))
      throw InputError("grounding override for unknown predicate '" + pred + "'");

  for (const PredicateDecl& p : decls) {
    std::vector<SampleTuple> tuples;
    if (auto ov = samples.grounding_overrides.find(p.name);
        ov != samples.grounding_overrides.end()) {
      tuples = ov->second;
      for (const SampleTuple& t : tuples) {
        if (t.size() != p.domains.size())
          throw InputError("grounding (" + tuple_text(t) + ") of '" + p.name +
                           "' has wrong arity");
        for (std::size_t i = 0; i < t.size(); ++i)
          if (!domain_has(idx.domains_.at(p.domains[i]), t[i]))
            throw InputError("grounding (" + tuple_text(t) + ") of '" + p.name +
                             "': unknown sample '" + t[i] + "'");
      }
      std::sort(tuples.begin(), tuples.end());
      tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
      if (tuples.empty())
        throw InputError("empty grounding set for '" + p.name + "'");
    } else {
      tuples.push_back({});
      for (const std::string& dn : p.domains) {
        std::vector<SampleTuple> grown;
        for (const SampleTuple& prefix : tuples)
          for (const Sample& s : idx.domains_.at(dn).samples) {
            SampleTuple t = prefix;
            t.push_back(s.name);
            grown.push_back(std::move(t));
          }
        tuples = std::move(grown);
      }
    }

    const std::size_t j = idx.slices_.size();
    idx.slices_.push_back({idx.atoms_.size(), tuples.size()});
    std::vector<std::vector<double>> pts;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < p.domains.size(); ++i) {
      const Domain& d = idx.domains_.at(p.domains[i]);
      const std::size_t di = d.samples.front().coords.size();
      for (const Sample& s : d.samples)
        if (s.coords.size() != di)
          throw InputError("domain '" + d.name + "' mixes point dimensions");
      dim += di;
    }
    for (const SampleTuple& t : tuples) {
      std::vector<double> x;
      x.reserve(dim);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Sample& s = domain_sample(idx.domains_.at(p.domains[i]), t[i]);
        x.insert(x.end(), s.coords.begin(), s.coords.end());
      }
      pts.push_back(std::move(x));
      GroundAtom a{p.name, t};
      idx.lookup_.emplace(a, idx.atoms_.size());
      idx.atoms_.push_back(std::move(a));
      idx.owner_.push_back(j);
    }
    idx.points_.push_back(std::move(pts));
    idx.dims_.push_back(dim);
    idx.tuples_.push_back(std::move(tuples));
  }

  for (const Supervision& sv : samples.supervisions) {
    if (sv.label != 1 && sv.label != -1)
      throw InputError("supervision label must be +1 or -1, got " +
                       std::to_string(sv.label));
    if (!names.count(sv.predicate))
      throw InputError("supervision for unknown predicate '" + sv.predicate + "'");
    if (!idx.coordinate(GroundAtom{sv.predicate, sv.tuple}))
      throw InputError("supervised tuple (" + tuple_text(sv.tuple) + ") of '" +
                       sv.predicate + "' is not in its grounding set");
  }
  return idx;
}

// ---------------------------------------------------------------------------

GroundFormula GroundFormula::literal(std::size_t k, bool negated) {
  GroundFormula g;
  g.kind = Kind::Literal;
  g.coordinate = k;
  g.negated = negated;
  return g;
}

double eval_ground(const GroundFormula& g, std::span<const double> p) {
  switch (g.kind) {
    case GroundFormula::Kind::Literal:
      return g.negated ? 1.0 - p[g.coordinate] : p[g.coordinate];
    case GroundFormula::Kind::WeakConj: {
      double m = 1.0;
      for (const GroundFormula& c : g.children) m = std::min(m, eval_ground(c, p));
      return m;
    }
    case GroundFormula::Kind::StrongDisj: {
      double s = 0.0;
      for (const GroundFormula& c : g.children) s += eval_ground(c, p);
      return std::min(1.0, s);
    }
  }
  return 0.0;
}

namespace {

void collect_domains(const Formula& f, const GroundingIndex& idx,
                     std::vector<std::string>& scope,
                     std::map<std::string, std::string>& out) {
  if (f.kind == Connective::Forall) {
    scope.push_back(f.name);
    collect_domains(f.children[0], idx, scope, out);
    scope.pop_back();
    return;
  }
  if (f.kind == Connective::Atom) {
    auto j = idx.find_predicate(f.name);
    if (!j) throw InputError("unknown predicate '" + f.name + "'");
    const PredicateDecl& d = idx.predicate(*j);
    if (d.domains.size() != f.args.size())
      throw InputError("predicate '" + f.name + "' expects " +
                       std::to_string(d.domains.size()) + " argument(s)");
    for (std::size_t i = 0; i < f.args.size(); ++i) {
      if (std::find(scope.begin(), scope.end(), f.args[i]) == scope.end()) continue;
      auto [it, inserted] = out.emplace(f.args[i], d.domains[i]);
      if (!inserted && it->second != d.domains[i])
        throw InputError("variable '" + f.args[i] + "' used over domains '" +
                         it->second + "' and '" + d.domains[i] + "'");
    }
    return;
  }
  for (const Formula& c : f.children) collect_domains(c, idx, scope, out);
}

class Expander {
 public:
  Expander(const GroundingIndex& idx, std::map<std::string, std::string> doms)
      : idx_(idx), doms_(std::move(doms)) {}

  GroundFormula expand(const Formula& f) {
    switch (f.kind) {
      case Connective::Atom:
        return GroundFormula::literal(resolve(f), false);
      case Connective::Neg:
        if (f.children[0].kind != Connective::Atom)
          throw InputError("formula is not in negation normal form");
        return GroundFormula::literal(resolve(f.children[0]), true);
      case Connective::WeakConj:
      case Connective::StrongDisj: {
        GroundFormula g;
        g.kind = f.kind == Connective::WeakConj ? GroundFormula::Kind::WeakConj
                                                : GroundFormula::Kind::StrongDisj;
        g.children.push_back(expand(f.children[0]));
        g.children.push_back(expand(f.children[1]));
        return g;
      }
      case Connective::Forall:
        return expand_prefix(f);
      default:
        throw InputError(std::string("connective '") + to_string(f.kind) +
                         "' is outside the concave fragment");
    }
  }

 private:
  GroundFormula expand_prefix(const Formula& f) {
    std::vector<std::string> vars;
    const Formula* body = &f;
    while (body->kind == Connective::Forall) {
      vars.push_back(body->name);
      body = &body->children[0];
    }
    std::vector<const std::vector<Sample>*> ranges;
    for (const std::string& v : vars) {
      auto d = doms_.find(v);
      if (d == doms_.end())
        throw InputError("cannot infer a domain for variable '" + v + "'");
      const Domain& dom = idx_.domain(d->second);
      if (dom.samples.empty())
        throw InputError("domain '" + dom.name + "' of variable '" + v +
                         "' has no samples");
      ranges.push_back(&dom.samples);
    }

    GroundFormula conj;
    conj.kind = GroundFormula::Kind::WeakConj;
    std::vector<std::size_t> counter(vars.size(), 0);
    std::vector<std::optional<std::string>> saved(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (auto it = env_.find(vars[i]); it != env_.end()) saved[i] = it->second;
    for (bool more = true; more;) {
      for (std::size_t i = 0; i < vars.size(); ++i)
        env_[vars[i]] = (*ranges[i])[counter[i]].name;
      conj.children.push_back(expand(*body));
      more = false;
      for (std::size_t i = vars.size(); i-- > 0;) {
        if (++counter[i] < ranges[i]->size()) {
          more = true;
          break;
        }
        counter[i] = 0;
      }
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (saved[i])
        env_[vars[i]] = *saved[i];
      else
        env_.erase(vars[i]);
    }
    if (conj.children.size() == 1) return std::move(conj.children.front());
    return conj;
  }

  std::size_t resolve(const Formula& atom) {
    auto j = idx_.find_predicate(atom.name);
    if (!j) throw InputError("unknown predicate '" + atom.name + "'");
    const PredicateDecl& d = idx_.predicate(*j);
    GroundAtom a{atom.name, {}};
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const std::string& t = atom.args[i];
      if (auto it = env_.find(t); it != env_.end()) {
        a.samples.push_back(it->second);
      } else if (domain_has(idx_.domain(d.domains[i]), t)) {
        a.samples.push_back(t);
      } else {
        throw InputError("free variable '" + t + "' in atom of '" + atom.name + "'");
      }
    }
    auto k = idx_.coordinate(a);
    if (!k)
      throw InputError("atom " + a.predicate + "(" + tuple_text(a.samples) +
                       ") is not in the grounding set");
    return *k;
  }

  const GroundingIndex& idx_;
  std::map<std::string, std::string> doms_;
  std::map<std::string, std::string> env_;
};

}  // namespace

std::map<std::string, std::string> infer_variable_domains(const Formula& f,
                                                          const GroundingIndex& idx) {
  std::map<std::string, std::string> out;
  std::vector<std::string> scope;
  collect_domains(f, idx, scope, out);
  return out;
}

GroundFormula expand_quantifiers(const NnfFormula& f, const GroundingIndex& idx) {
  if (!check_concave_fragment(f).is_concave_fragment)
    throw InputError("formula is outside the concave fragment");
  Expander ex(idx, infer_variable_domains(f.formula(), idx));
  return ex.expand(f.formula());
}

Interpretation make_interpretation(const Formula& f, const GroundingIndex& idx,
                                   std::span<const double> p) {
  Interpretation in;
  for (std::size_t k = 0; k < idx.size(); ++k) in.values.emplace(idx.atom(k), p[k]);
  for (const auto& [var, dom] : infer_variable_domains(f, idx)) {
    std::vector<std::string> names;
    for (const Sample& s : idx.domain(dom).samples) names.push_back(s.name);
    in.variable_domains.emplace(var, std::move(names));
  }
  return in;
}

}  // namespace lukcon
