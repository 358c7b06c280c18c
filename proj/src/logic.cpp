#include "lukcon/logic.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <utility>

#include "lukcon/errors.hpp"

namespace lukcon {

const char* to_string(Connective c) {
  switch (c) {
    case Connective::Atom: return "atom";
    case Connective::Neg: return "neg";
    case Connective::StrongConj: return "strong_conj";
    case Connective::StrongDisj: return "strong_disj";
    case Connective::WeakConj: return "weak_conj";
    case Connective::WeakDisj: return "weak_disj";
    case Connective::Implies: return "implies";
    case Connective::Forall: return "forall";
  }
  return "?";
}

Formula Formula::atom(std::string predicate, std::vector<std::string> terms) {
  Formula f;
  f.kind = Connective::Atom;
  f.name = std::move(predicate);
  f.args = std::move(terms);
  return f;
}

Formula Formula::neg(Formula child) {
  Formula f;
  f.kind = Connective::Neg;
  f.children.push_back(std::move(child));
  return f;
}

Formula Formula::binary(Connective c, Formula lhs, Formula rhs) {
  Formula f;
  f.kind = c;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

Formula Formula::forall(std::string variable, Formula body) {
  Formula f;
  f.kind = Connective::Forall;
  f.name = std::move(variable);
  f.children.push_back(std::move(body));
  return f;
}

bool Formula::is_binary() const {
  return kind != Connective::Atom && kind != Connective::Neg &&
         kind != Connective::Forall;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, Forall, Colon, LParen, RParen, Comma, Tilde, Star, Plus,
                 Amp, Bar, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const int l = line;
    const int cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      std::string word(src.substr(i, j - i));
      advance(j - i);
      out.push_back({word == "forall" ? Tok::Forall : Tok::Ident, word, l, cl});
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      advance(2);
      out.push_back({Tok::Arrow, "->", l, cl});
      continue;
    }
    Tok k;
    switch (c) {
      case ':': k = Tok::Colon; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case '~': k = Tok::Tilde; break;
      case '*': k = Tok::Star; break;
      case '+': k = Tok::Plus; break;
      case '&': k = Tok::Amp; break;
      case '|': k = Tok::Bar; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", l, cl);
    }
    advance(1);
    out.push_back({k, std::string(1, c), l, cl});
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const Signature* sig)
      : toks_(std::move(toks)), sig_(sig) {}

  Formula parse() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    std::vector<std::string> bound;
    check_binders(f, bound);
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, peek().line, peek().column);
  }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) {
      fail(std::string("expected ") + what +
           (peek().kind == Tok::End ? " before end of input"
                                    : ", found '" + peek().text + "'"));
    }
    return next();
  }

  // formula := "forall" VAR ":" formula | impl
  Formula formula() {
    if (peek().kind == Tok::Forall) {
      next();
      std::string var = expect(Tok::Ident, "variable after 'forall'").text;
      expect(Tok::Colon, "':'");
      return Formula::forall(std::move(var), formula());
    }
    return implication();
  }

  // impl := disj ("->" impl)?
  Formula implication() {
    Formula lhs = left_assoc(Tok::Bar, Connective::WeakDisj, 0);
    if (peek().kind == Tok::Arrow) {
      next();
      return Formula::binary(Connective::Implies, std::move(lhs), implication());
    }
    return lhs;
  }

  // disj / conj / sdisj / sconj levels, loosest first.
  Formula left_assoc(Tok op, Connective c, int level) {
    static constexpr std::pair<Tok, Connective> kLevels[] = {
        {Tok::Bar, Connective::WeakDisj},
        {Tok::Amp, Connective::WeakConj},
        {Tok::Plus, Connective::StrongDisj},
        {Tok::Star, Connective::StrongConj},
    };
    auto operand = [&]() -> Formula {
      if (level + 1 < 4)
        return left_assoc(kLevels[level + 1].first, kLevels[level + 1].second,
                          level + 1);
      return unary();
    };
    Formula lhs = operand();
    while (peek().kind == op) {
      next();
      lhs = Formula::binary(c, std::move(lhs), operand());
    }
    return lhs;
  }

  // unary := "~" unary | atom | "(" formula ")"
  Formula unary() {
    if (peek().kind == Tok::Tilde) {
      next();
      return Formula::neg(unary());
    }
    if (peek().kind == Tok::LParen) {
      next();
      Formula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (peek().kind == Tok::Ident) return atom();
    fail(peek().kind == Tok::End ? "unexpected end of input"
                                 : "unexpected '" + peek().text + "'");
  }

  // atom := IDENT "(" term ("," term)* ")"
  Formula atom() {
    const Token& name = next();
    expect(Tok::LParen, "'(' after predicate name");
    std::vector<std::string> terms;
    terms.push_back(expect(Tok::Ident, "term").text);
    while (peek().kind == Tok::Comma) {
      next();
      terms.push_back(expect(Tok::Ident, "term").text);
    }
    expect(Tok::RParen, "')'");
    check_arity(name, terms.size());
    return Formula::atom(name.text, std::move(terms));
  }

  void check_arity(const Token& name, std::size_t n) {
    if (sig_ != nullptr) {
      auto it = sig_->find(name.text);
      if (it == sig_->end())
        throw InputError("unknown predicate '" + name.text + "' at line " +
                         std::to_string(name.line) + ", column " +
                         std::to_string(name.column));
      if (it->second != n)
        throw InputError("predicate '" + name.text + "' expects " +
                         std::to_string(it->second) + " argument(s), got " +
                         std::to_string(n) + " at line " +
                         std::to_string(name.line) + ", column " +
                         std::to_string(name.column));
      return;
    }
    auto [it, inserted] = seen_.emplace(name.text, n);
    if (!inserted && it->second != n)
      throw InputError("predicate '" + name.text + "' used with arities " +
                       std::to_string(it->second) + " and " + std::to_string(n));
  }

  static bool occurs_free(const Formula& f, const std::string& var) {
    if (f.kind == Connective::Atom)
      return std::find(f.args.begin(), f.args.end(), var) != f.args.end();
    if (f.kind == Connective::Forall && f.name == var) return false;
    return std::any_of(f.children.begin(), f.children.end(),
                       [&](const Formula& c) { return occurs_free(c, var); });
  }

  void check_binders(const Formula& f, std::vector<std::string>& bound) {
    if (f.kind == Connective::Forall) {
      if (std::find(bound.begin(), bound.end(), f.name) != bound.end())
        throw InputError("variable '" + f.name + "' bound twice on one path");
      if (!occurs_free(f.children[0], f.name))
        throw InputError("quantified variable '" + f.name +
                         "' does not occur in its scope");
      bound.push_back(f.name);
      check_binders(f.children[0], bound);
      bound.pop_back();
      return;
    }
    for (const Formula& c : f.children) check_binders(c, bound);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Signature* sig_;
  Signature seen_;
};

}  // namespace

Formula parse_formula(std::string_view text, const Signature& sig) {
  return Parser(tokenize(text), &sig).parse();
}

Formula parse_formula(std::string_view text) {
  return Parser(tokenize(text), nullptr).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

const char* op_token(Connective c) {
  switch (c) {
    case Connective::StrongConj: return " * ";
    case Connective::StrongDisj: return " + ";
    case Connective::WeakConj: return " & ";
    case Connective::WeakDisj: return " | ";
    case Connective::Implies: return " -> ";
    default: return "";
  }
}

void print_into(const Formula& f, std::string& out) {
  switch (f.kind) {
    case Connective::Atom: {
      out += f.name;
      out += '(';
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += ',';
        out += f.args[i];
      }
      out += ')';
      return;
    }
    case Connective::Neg: {
      out += '~';
      const Formula& c = f.children[0];
      const bool wrap = c.kind != Connective::Atom && c.kind != Connective::Neg;
      if (wrap) out += '(';
      print_into(c, out);
      if (wrap) out += ')';
      return;
    }
    case Connective::Forall:
      out += "forall ";
      out += f.name;
      out += ": ";
      print_into(f.children[0], out);
      return;
    default: {
      // Binary operands are parenthesised unless they are atoms or negations,
      // which keeps the output unambiguous for every associativity.
      for (std::size_t i = 0; i < 2; ++i) {
        const Formula& c = f.children[i];
        const bool wrap = c.kind != Connective::Atom && c.kind != Connective::Neg;
        if (i) out += op_token(f.kind);
        if (wrap) out += '(';
        print_into(c, out);
        if (wrap) out += ')';
      }
      return;
    }
  }
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print_into(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// NNF and fragment check

namespace {

Formula nnf(const Formula& f, bool negated) {
  switch (f.kind) {
    case Connective::Atom:
      return negated ? Formula::neg(f) : f;
    case Connective::Neg:
      return nnf(f.children[0], !negated);
    case Connective::StrongConj:
    case Connective::StrongDisj:
    case Connective::WeakConj:
    case Connective::WeakDisj: {
      Connective c = f.kind;
      if (negated) {
        switch (c) {
          case Connective::StrongConj: c = Connective::StrongDisj; break;
          case Connective::StrongDisj: c = Connective::StrongConj; break;
          case Connective::WeakConj: c = Connective::WeakDisj; break;
          default: c = Connective::WeakConj; break;
        }
      }
      return Formula::binary(c, nnf(f.children[0], negated),
                             nnf(f.children[1], negated));
    }
    case Connective::Implies:
      // a ⇒ b = ¬a ⊕ b ;  ¬(a ⇒ b) = a ⊗ ¬b
      if (negated)
        return Formula::binary(Connective::StrongConj, nnf(f.children[0], false),
                               nnf(f.children[1], true));
      return Formula::binary(Connective::StrongDisj, nnf(f.children[0], true),
                             nnf(f.children[1], false));
    case Connective::Forall:
      if (negated)
        throw InputError("negated quantifier over '" + f.name +
                         "' is outside the supported fragment");
      return Formula::forall(f.name, nnf(f.children[0], false));
  }
  return f;
}

bool find_offender(const Formula& f, std::vector<std::size_t>& path,
                   std::string& what) {
  switch (f.kind) {
    case Connective::Atom:
      return false;
    case Connective::Neg:
      if (f.children[0].kind == Connective::Atom) return false;
      what = to_string(f.kind);
      return true;
    case Connective::WeakConj:
    case Connective::StrongDisj:
    case Connective::Forall:
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        path.push_back(i);
        if (find_offender(f.children[i], path, what)) return true;
        path.pop_back();
      }
      return false;
    default:
      what = to_string(f.kind);
      return true;
  }
}

}  // namespace

NnfFormula to_nnf(const Formula& f) { return NnfFormula(nnf(f, false)); }

FragmentReport check_concave_fragment(const NnfFormula& f) {
  FragmentReport r;
  std::vector<std::size_t> path;
  std::string what;
  if (find_offender(f.formula(), path, what)) {
    r.is_concave_fragment = false;
    r.offending_path = std::move(path);
    r.offending_connective = std::move(what);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation

double luk_neg(double x) { return 1.0 - x; }
double luk_strong_conj(double x, double y) { return std::max(0.0, x + y - 1.0); }
double luk_strong_disj(double x, double y) { return std::min(1.0, x + y); }
double luk_weak_conj(double x, double y) { return std::min(x, y); }
double luk_weak_disj(double x, double y) { return std::max(x, y); }
double luk_implies(double x, double y) { return std::min(1.0, 1.0 - x + y); }

namespace {

using Env = std::map<std::string, std::string>;

double eval(const Formula& f, const Interpretation& in, Env& env) {
  switch (f.kind) {
    case Connective::Atom: {
      GroundAtom a{f.name, {}};
      a.samples.reserve(f.args.size());
      for (const std::string& t : f.args) {
        auto it = env.find(t);
        a.samples.push_back(it == env.end() ? t : it->second);
      }
      auto v = in.values.find(a);
      if (v == in.values.end()) {
        std::string s = a.predicate + "(";
        for (std::size_t i = 0; i < a.samples.size(); ++i)
          s += (i ? "," : "") + a.samples[i];
        throw InputError("no truth value for atom " + s + ")");
      }
      return v->second;
    }
    case Connective::Neg:
      return luk_neg(eval(f.children[0], in, env));
    case Connective::Forall: {
      auto dom = in.variable_domains.find(f.name);
      const std::vector<std::string>& range =
          dom == in.variable_domains.end() ? in.universe : dom->second;
      std::optional<std::string> shadowed;
      if (auto it = env.find(f.name); it != env.end()) shadowed = it->second;
      double m = 1.0;
      for (const std::string& s : range) {
        env[f.name] = s;
        m = std::min(m, eval(f.children[0], in, env));
      }
      if (shadowed)
        env[f.name] = *shadowed;
      else
        env.erase(f.name);
      return m;
    }
    default:
      break;
  }
  const double x = eval(f.children[0], in, env);
  const double y = eval(f.children[1], in, env);
  switch (f.kind) {
    case Connective::StrongConj: return luk_strong_conj(x, y);
    case Connective::StrongDisj: return luk_strong_disj(x, y);
    case Connective::WeakConj: return luk_weak_conj(x, y);
    case Connective::WeakDisj: return luk_weak_disj(x, y);
    case Connective::Implies: return luk_implies(x, y);
    default: return 0.0;
  }
}

}  // namespace

double eval_lukasiewicz(const Formula& f, const Interpretation& interp) {
  Env env;
  return eval(f, interp, env);
}

}  // namespace lukcon
