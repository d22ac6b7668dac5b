#include "toposlab/logic.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace toposlab {

namespace {

// ---------------------------------------------------------------------------
// printing

enum SortLevel { SORT_FUN = 0, SORT_SUM = 1, SORT_PROD = 2, SORT_ATOM = 3 };

void print_sort(std::ostringstream& out, const Sort& s, int level) {
  if (s.is_omega()) {
    out << "Omega";
    return;
  }
  switch (s.kind) {
    case Sort::Kind::Unit: out << "1"; return;
    case Sort::Kind::Empty: out << "0"; return;
    case Sort::Kind::Base: out << s.base; return;
    case Sort::Kind::Pow:
      out << "P(";
      print_sort(out, s.args[0], SORT_FUN);
      out << ")";
      return;
    case Sort::Kind::Prod: {
      bool paren = level > SORT_PROD;
      if (paren) out << "(";
      print_sort(out, s.args[0], SORT_PROD);
      out << "*";
      print_sort(out, s.args[1], SORT_ATOM);
      if (paren) out << ")";
      return;
    }
    case Sort::Kind::Sum: {
      bool paren = level > SORT_SUM;
      if (paren) out << "(";
      print_sort(out, s.args[0], SORT_SUM);
      out << "+";
      print_sort(out, s.args[1], SORT_PROD);
      if (paren) out << ")";
      return;
    }
    case Sort::Kind::Fun: {
      bool paren = level > SORT_FUN;
      if (paren) out << "(";
      print_sort(out, s.args[0], SORT_SUM);
      out << "->";
      print_sort(out, s.args[1], SORT_FUN);
      if (paren) out << ")";
      return;
    }
  }
}

void print_term(std::ostringstream& out, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: out << t.name; return;
    case Term::Kind::Unit: out << "unit"; return;
    case Term::Kind::Pair:
      out << "pair(";
      print_term(out, t.args[0]);
      out << ",";
      print_term(out, t.args[1]);
      out << ")";
      return;
    case Term::Kind::Fst:
    case Term::Kind::Snd:
    case Term::Kind::Inl:
    case Term::Kind::Inr: {
      const char* head = t.kind == Term::Kind::Fst   ? "fst"
                         : t.kind == Term::Kind::Snd ? "snd"
                         : t.kind == Term::Kind::Inl ? "inl"
                                                     : "inr";
      out << head << "(";
      print_term(out, t.args[0]);
      out << ")";
      return;
    }
    case Term::Kind::Apply:
      print_term(out, t.args[0]);
      out << "(";
      print_term(out, t.args[1]);
      out << ")";
      return;
  }
}

// Formula print levels mirror the grammar's nesting.
enum FormLevel { LV_FORM = 0, LV_IMP = 1, LV_DISJ = 2, LV_CONJ = 3, LV_NEG = 4 };

void print_formula(std::ostringstream& out, const Formula& f, int level) {
  switch (f.kind) {
    case Formula::Kind::Truth: out << "true"; return;
    case Formula::Kind::Falsity: out << "false"; return;
    case Formula::Kind::Eq:
      print_term(out, f.terms[0]);
      out << " = ";
      print_term(out, f.terms[1]);
      return;
    case Formula::Kind::Mem:
      print_term(out, f.terms[0]);
      out << " in ";
      print_term(out, f.terms[1]);
      return;
    case Formula::Kind::TermAtom: print_term(out, f.terms[0]); return;
    case Formula::Kind::MacroCall: {
      out << f.name << "(";
      for (size_t i = 0; i < f.terms.size(); ++i) {
        if (i) out << ",";
        print_term(out, f.terms[i]);
      }
      out << ")";
      return;
    }
    case Formula::Kind::Not:
      out << "~";
      print_formula(out, f.kids[0], LV_NEG);
      return;
    case Formula::Kind::And: {
      bool paren = level > LV_CONJ;
      if (paren) out << "(";
      print_formula(out, f.kids[0], LV_CONJ);
      out << " /\\ ";
      print_formula(out, f.kids[1], LV_NEG);
      if (paren) out << ")";
      return;
    }
    case Formula::Kind::Or: {
      bool paren = level > LV_DISJ;
      if (paren) out << "(";
      print_formula(out, f.kids[0], LV_DISJ);
      out << " \\/ ";
      print_formula(out, f.kids[1], LV_CONJ);
      if (paren) out << ")";
      return;
    }
    case Formula::Kind::Implies: {
      bool paren = level > LV_IMP;
      if (paren) out << "(";
      print_formula(out, f.kids[0], LV_DISJ);
      out << " -> ";
      print_formula(out, f.kids[1], LV_IMP);
      if (paren) out << ")";
      return;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      bool paren = level > LV_FORM;
      if (paren) out << "(";
      out << (f.kind == Formula::Kind::Forall ? "forall " : "exists ") << f.name << ":";
      print_sort(out, f.sort, SORT_FUN);
      out << ". ";
      print_formula(out, f.kids[0], LV_FORM);
      if (paren) out << ")";
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// tokenizer

struct Token {
  enum class Kind { Ident, Number, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1, col = 1;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Token::Kind k, std::string s, int l, int c) {
    out.push_back({k, std::move(s), l, c});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int tl = line, tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      push(Token::Kind::Ident, text.substr(i, j - i), tl, tc);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      push(Token::Kind::Number, text.substr(i, j - i), tl, tc);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "->" || two == "\\/" || two == "/\\") {
      push(Token::Kind::Sym, two, tl, tc);
      i += 2;
      col += 2;
      continue;
    }
    if (std::string("~=().,:*+").find(c) != std::string::npos) {
      push(Token::Kind::Sym, std::string(1, c), tl, tc);
      ++i;
      ++col;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
  }
  push(Token::Kind::End, "", line, col);
  return out;
}

// ---------------------------------------------------------------------------
// parser

const std::set<std::string> kKeywords = {"forall", "exists", "true", "false", "in",
                                         "unit",   "pair",   "fst",  "snd",   "inl",
                                         "inr",    "P",      "Omega"};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Formula sentence() {
    Formula f = formula();
    expect_end();
    return f;
  }

  Sort sort_only() {
    Sort s = sort();
    expect_end();
    return s;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_sym(const char* s) const {
    return peek().kind == Token::Kind::Sym && peek().text == s;
  }
  bool at_ident(const char* s) const {
    return peek().kind == Token::Kind::Ident && peek().text == s;
  }
  bool eat_sym(const char* s) {
    if (!at_sym(s)) return false;
    take();
    return true;
  }
  void need_sym(const char* s) {
    if (!eat_sym(s)) fail(std::string("expected '") + s + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(msg + ", found " + got, t.line, t.col);
  }
  void expect_end() {
    if (peek().kind != Token::Kind::End) fail("expected end of input");
  }

  std::string ident(const char* what) {
    if (peek().kind != Token::Kind::Ident || kKeywords.count(peek().text))
      fail(std::string("expected ") + what);
    return take().text;
  }

  Sort sort() {
    Sort left = sort_sum();
    if (eat_sym("->")) return Sort::fun(std::move(left), sort());
    return left;
  }
  Sort sort_sum() {
    Sort left = sort_prod();
    while (eat_sym("+")) left = Sort::sum(std::move(left), sort_prod());
    return left;
  }
  Sort sort_prod() {
    Sort left = sort_atom();
    while (eat_sym("*")) left = Sort::prod(std::move(left), sort_atom());
    return left;
  }
  Sort sort_atom() {
    if (peek().kind == Token::Kind::Number) {
      Token t = take();
      if (t.text == "1") return Sort::unit();
      if (t.text == "0") return Sort::empty();
      throw SyntaxError("expected a sort, found '" + t.text + "'", t.line, t.col);
    }
    if (at_ident("Omega")) {
      take();
      return Sort::omega();
    }
    if (at_ident("P") && peek(1).kind == Token::Kind::Sym && peek(1).text == "(") {
      take();
      take();
      Sort inner = sort();
      need_sym(")");
      return Sort::pow(std::move(inner));
    }
    if (eat_sym("(")) {
      Sort inner = sort();
      need_sym(")");
      return inner;
    }
    if (peek().kind == Token::Kind::Ident && !kKeywords.count(peek().text))
      return Sort::base_sort(take().text);
    fail("expected a sort");
  }

  Term term() {
    Term t = term_primary();
    while (at_sym("(")) {
      take();
      Term arg = term();
      need_sym(")");
      Term app = Term::apply(std::move(t), std::move(arg));
      t = std::move(app);
    }
    return t;
  }
  Term term_primary() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) fail("expected a term");
    int line = t.line, col = t.col;
    auto with_pos = [line, col](Term t2) {
      t2.line = line;
      t2.col = col;
      return t2;
    };
    if (at_ident("unit")) {
      take();
      return with_pos(Term::unit_point());
    }
    if (at_ident("pair")) {
      take();
      need_sym("(");
      Term a = term();
      need_sym(",");
      Term b = term();
      need_sym(")");
      return with_pos(Term::pair(std::move(a), std::move(b)));
    }
    for (const char* head : {"fst", "snd", "inl", "inr"}) {
      if (!at_ident(head)) continue;
      take();
      need_sym("(");
      Term a = term();
      need_sym(")");
      std::string h = head;
      Term out = h == "fst"   ? Term::fst(std::move(a))
                 : h == "snd" ? Term::snd(std::move(a))
                 : h == "inl" ? Term::inl(std::move(a))
                              : Term::inr(std::move(a));
      return with_pos(std::move(out));
    }
    if (kKeywords.count(t.text)) fail("expected a term");
    return with_pos(Term::var(take().text));
  }

  Formula formula() {
    if (at_ident("forall") || at_ident("exists")) {
      bool is_forall = peek().text == "forall";
      Token kw = take();
      std::string var = ident("a variable name");
      need_sym(":");
      Sort s = sort();
      need_sym(".");
      Formula body = formula();
      Formula out = is_forall ? Formula::forall(var, std::move(s), std::move(body))
                              : Formula::exists(var, std::move(s), std::move(body));
      out.line = kw.line;
      out.col = kw.col;
      return out;
    }
    return imp();
  }
  Formula imp() {
    Formula left = disj();
    if (eat_sym("->")) {
      Formula right = at_ident("forall") || at_ident("exists") ? formula() : imp();
      return Formula::implies(std::move(left), std::move(right));
    }
    return left;
  }
  Formula disj() {
    Formula left = conj();
    while (at_sym("\\/")) {
      take();
      left = Formula::disj(std::move(left), conj());
    }
    return left;
  }
  Formula conj() {
    Formula left = neg();
    while (at_sym("/\\")) {
      take();
      left = Formula::conj(std::move(left), neg());
    }
    return left;
  }
  Formula neg() {
    if (at_sym("~")) {
      Token t = take();
      Formula out = Formula::neg(neg());
      out.line = t.line;
      out.col = t.col;
      return out;
    }
    return atom();
  }
  Formula atom() {
    const Token& t = peek();
    int line = t.line, col = t.col;
    auto with_pos = [line, col](Formula f) {
      f.line = line;
      f.col = col;
      return f;
    };
    if (at_ident("true")) {
      take();
      return with_pos(Formula::truth());
    }
    if (at_ident("false")) {
      take();
      return with_pos(Formula::falsity());
    }
    if (at_sym("(")) {
      take();
      Formula f = formula();
      need_sym(")");
      return f;
    }
    if (peek().kind == Token::Kind::Ident && is_macro_name(peek().text) &&
        peek(1).kind == Token::Kind::Sym && peek(1).text == "(") {
      std::string name = take().text;
      take();
      std::vector<Term> args;
      if (!at_sym(")")) {
        args.push_back(term());
        while (eat_sym(",")) args.push_back(term());
      }
      need_sym(")");
      return with_pos(Formula::macro(std::move(name), std::move(args)));
    }
    Term left = term();
    if (eat_sym("=")) return with_pos(Formula::eq(std::move(left), term()));
    if (at_ident("in")) {
      take();
      return with_pos(Formula::mem(std::move(left), term()));
    }
    return with_pos(Formula::term_atom(std::move(left)));
  }
};

// ---------------------------------------------------------------------------
// macros

void collect_idents(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.name);
  for (const Term& a : t.args) collect_idents(a, out);
}

/** Deterministic fresh names avoiding everything in `used`. */
class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> used) : used_(std::move(used)) {}
  std::string pick(const std::string& base) {
    if (!used_.count(base) && !kKeywords.count(base) && !is_macro_name(base)) {
      used_.insert(base);
      return base;
    }
    for (int i = 1;; ++i) {
      std::string c = base + std::to_string(i);
      if (!used_.count(c)) {
        used_.insert(c);
        return c;
      }
    }
  }

 private:
  std::set<std::string> used_;
};

const Sort& pow_arg(const std::string& macro, const Sort& s, size_t which) {
  if (s.kind != Sort::Kind::Pow)
    throw SortMismatch(macro + ": argument " + std::to_string(which + 1) +
                       " must have a power sort, got " + sort_to_string(s));
  return s.args[0];
}

struct RelSorts {
  Sort domain, codomain;
};
RelSorts rel_sorts(const std::string& macro, const Sort& s, size_t which) {
  const Sort& inner = pow_arg(macro, s, which);
  if (inner.kind != Sort::Kind::Prod)
    throw SortMismatch(macro + ": argument " + std::to_string(which + 1) +
                       " must be a relation sort P(S*T), got " + sort_to_string(s));
  return {inner.args[0], inner.args[1]};
}

void need_arity(const std::string& macro, const std::vector<Term>& args, size_t n) {
  if (args.size() != n)
    throw ArityError(macro + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") +
                     ", got " + std::to_string(args.size()));
}

void need_same(const std::string& macro, const Sort& a, const Sort& b, const char* what) {
  if (!(a == b))
    throw SortMismatch(macro + ": " + what + " (" + sort_to_string(a) + " vs " +
                       sort_to_string(b) + ")");
}

/** single-valued: forall x forall y forall z. F(x,y) /\ F(x,z) -> y = z */
Formula single_valued(const Term& f, const Sort& dom, const Sort& cod, FreshNames& fresh) {
  std::string x = fresh.pick("x"), y = fresh.pick("y"), z = fresh.pick("z");
  Formula body = Formula::implies(
      Formula::conj(Formula::mem(Term::pair(Term::var(x), Term::var(y)), f),
                    Formula::mem(Term::pair(Term::var(x), Term::var(z)), f)),
      Formula::eq(Term::var(y), Term::var(z)));
  return Formula::forall(
      x, dom, Formula::forall(y, cod, Formula::forall(z, cod, std::move(body))));
}

}  // namespace

std::string sort_to_string(const Sort& s) {
  std::ostringstream out;
  print_sort(out, s, SORT_FUN);
  return out.str();
}

std::string term_to_string(const Term& t) {
  std::ostringstream out;
  print_term(out, t);
  return out.str();
}

std::string formula_to_string(const Formula& f) {
  std::ostringstream out;
  print_formula(out, f, LV_FORM);
  return out.str();
}

Formula parse_formula(const std::string& text) { return Parser(text).sentence(); }

Sort parse_sort(const std::string& text) { return Parser(text).sort_only(); }

const std::vector<std::string>& macro_names() {
  static const std::vector<std::string> names = {
      "Inhab",  "Proper", "ProperIn", "Compl",       "ComplIn", "SubsetOf", "Inj",
      "Surj",   "FunRel", "FunRelTotal", "InRange", "DecEq",   "KFin"};
  return names;
}

bool is_macro_name(const std::string& name) {
  const auto& names = macro_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Formula expand_macro(const std::string& name, const std::vector<Term>& args,
                     const std::vector<Sort>& arg_sorts) {
  if (!is_macro_name(name)) throw UnknownMacro("unknown defined predicate '" + name + "'");
  if (args.size() != arg_sorts.size())
    throw InternalError("expand_macro: args and sorts out of step");

  std::set<std::string> used;
  for (const Term& t : args) collect_idents(t, used);
  FreshNames fresh(std::move(used));

  if (name == "Inhab") {
    need_arity(name, args, 1);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    std::string x = fresh.pick("x");
    return Formula::exists(x, elem, Formula::mem(Term::var(x), args[0]));
  }
  if (name == "Proper") {
    need_arity(name, args, 1);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    std::string x = fresh.pick("x");
    return Formula::exists(x, elem, Formula::neg(Formula::mem(Term::var(x), args[0])));
  }
  if (name == "ProperIn") {
    // ProperIn(C, A): A minus C is inhabited.
    need_arity(name, args, 2);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    need_same(name, arg_sorts[0], arg_sorts[1], "both arguments need the same power sort");
    std::string x = fresh.pick("x");
    return Formula::exists(
        x, elem,
        Formula::conj(Formula::mem(Term::var(x), args[1]),
                      Formula::neg(Formula::mem(Term::var(x), args[0]))));
  }
  if (name == "Compl") {
    need_arity(name, args, 1);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    std::string x = fresh.pick("x");
    return Formula::forall(
        x, elem,
        Formula::disj(Formula::mem(Term::var(x), args[0]),
                      Formula::neg(Formula::mem(Term::var(x), args[0]))));
  }
  if (name == "SubsetOf") {
    need_arity(name, args, 2);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    need_same(name, arg_sorts[0], arg_sorts[1], "both arguments need the same power sort");
    std::string x = fresh.pick("x");
    return Formula::forall(x, elem,
                           Formula::implies(Formula::mem(Term::var(x), args[0]),
                                            Formula::mem(Term::var(x), args[1])));
  }
  if (name == "ComplIn") {
    // ComplIn(C, A): C is a subset of A that is complemented relative to A.
    need_arity(name, args, 2);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    need_same(name, arg_sorts[0], arg_sorts[1], "both arguments need the same power sort");
    std::string x = fresh.pick("x");
    Formula subset = Formula::forall(x, elem,
                                     Formula::implies(Formula::mem(Term::var(x), args[0]),
                                                      Formula::mem(Term::var(x), args[1])));
    std::string y = fresh.pick("y");
    Formula split = Formula::forall(
        y, elem,
        Formula::implies(Formula::mem(Term::var(y), args[1]),
                         Formula::disj(Formula::mem(Term::var(y), args[0]),
                                       Formula::neg(Formula::mem(Term::var(y), args[0])))));
    return Formula::conj(std::move(subset), std::move(split));
  }
  if (name == "Inj") {
    need_arity(name, args, 1);
    RelSorts rs = rel_sorts(name, arg_sorts[0], 0);
    std::string x = fresh.pick("x"), y = fresh.pick("y"), z = fresh.pick("z");
    Formula body = Formula::implies(
        Formula::conj(Formula::mem(Term::pair(Term::var(x), Term::var(z)), args[0]),
                      Formula::mem(Term::pair(Term::var(y), Term::var(z)), args[0])),
        Formula::eq(Term::var(x), Term::var(y)));
    return Formula::forall(
        x, rs.domain,
        Formula::forall(y, rs.domain, Formula::forall(z, rs.codomain, std::move(body))));
  }
  if (name == "Surj") {
    need_arity(name, args, 1);
    RelSorts rs = rel_sorts(name, arg_sorts[0], 0);
    std::string z = fresh.pick("z"), x = fresh.pick("x");
    return Formula::forall(
        z, rs.codomain,
        Formula::exists(x, rs.domain,
                        Formula::mem(Term::pair(Term::var(x), Term::var(z)), args[0])));
  }
  if (name == "FunRel") {
    // FunRel(F, A): F is the graph of a map whose domain is exactly A.
    need_arity(name, args, 2);
    RelSorts rs = rel_sorts(name, arg_sorts[0], 0);
    need_same(name, pow_arg(name, arg_sorts[1], 1), rs.domain,
              "the domain set must collect elements of the relation's first sort");
    Formula sv = single_valued(args[0], rs.domain, rs.codomain, fresh);
    std::string x = fresh.pick("x"), y = fresh.pick("y");
    Formula total = Formula::forall(
        x, rs.domain,
        Formula::implies(
            Formula::mem(Term::var(x), args[1]),
            Formula::exists(y, rs.codomain,
                            Formula::mem(Term::pair(Term::var(x), Term::var(y)), args[0]))));
    std::string x2 = fresh.pick("x"), y2 = fresh.pick("y");
    Formula domain = Formula::forall(
        x2, rs.domain,
        Formula::forall(
            y2, rs.codomain,
            Formula::implies(Formula::mem(Term::pair(Term::var(x2), Term::var(y2)), args[0]),
                             Formula::mem(Term::var(x2), args[1]))));
    return Formula::conj(std::move(sv), Formula::conj(std::move(total), std::move(domain)));
  }
  if (name == "FunRelTotal") {
    need_arity(name, args, 1);
    RelSorts rs = rel_sorts(name, arg_sorts[0], 0);
    Formula sv = single_valued(args[0], rs.domain, rs.codomain, fresh);
    std::string x = fresh.pick("x"), y = fresh.pick("y");
    Formula total = Formula::forall(
        x, rs.domain,
        Formula::exists(y, rs.codomain,
                        Formula::mem(Term::pair(Term::var(x), Term::var(y)), args[0])));
    return Formula::conj(std::move(sv), std::move(total));
  }
  if (name == "InRange") {
    need_arity(name, args, 2);
    RelSorts rs = rel_sorts(name, arg_sorts[0], 0);
    need_same(name, arg_sorts[1], rs.codomain,
              "the element must live in the relation's second sort");
    std::string x = fresh.pick("x");
    return Formula::exists(x, rs.domain,
                           Formula::mem(Term::pair(Term::var(x), args[1]), args[0]));
  }
  if (name == "DecEq") {
    need_arity(name, args, 1);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    std::string x = fresh.pick("x"), y = fresh.pick("y");
    Formula body = Formula::implies(
        Formula::conj(Formula::mem(Term::var(x), args[0]), Formula::mem(Term::var(y), args[0])),
        Formula::disj(Formula::eq(Term::var(x), Term::var(y)),
                      Formula::neg(Formula::eq(Term::var(x), Term::var(y)))));
    return Formula::forall(x, elem, Formula::forall(y, elem, std::move(body)));
  }
  if (name == "KFin") {
    // KFin(S): S belongs to every family of subsets containing the empty set
    // and closed under adjoining one element.
    need_arity(name, args, 1);
    const Sort& elem = pow_arg(name, arg_sorts[0], 0);
    Sort set_sort = arg_sorts[0];
    Sort family_sort = Sort::pow(set_sort);
    std::string fam = fresh.pick("M");
    Term fam_var = Term::var(fam);

    std::string e = fresh.pick("E"), ye = fresh.pick("y");
    Formula empty_in = Formula::forall(
        e, set_sort,
        Formula::implies(
            Formula::forall(ye, elem, Formula::neg(Formula::mem(Term::var(ye), Term::var(e)))),
            Formula::mem(Term::var(e), fam_var)));

    std::string z = fresh.pick("Z"), a = fresh.pick("a"), w = fresh.pick("W"),
                yw = fresh.pick("y");
    Formula in_w = Formula::mem(Term::var(yw), Term::var(w));
    Formula in_z_or_a = Formula::disj(Formula::mem(Term::var(yw), Term::var(z)),
                                      Formula::eq(Term::var(yw), Term::var(a)));
    Formula w_is_adjoin = Formula::forall(
        yw, elem,
        Formula::conj(Formula::implies(in_w, in_z_or_a),
                      Formula::implies(in_z_or_a, in_w)));
    Formula adjoin_closed = Formula::forall(
        z, set_sort,
        Formula::forall(
            a, elem,
            Formula::implies(
                Formula::mem(Term::var(z), fam_var),
                Formula::forall(w, set_sort,
                                Formula::implies(std::move(w_is_adjoin),
                                                 Formula::mem(Term::var(w), fam_var))))));

    return Formula::forall(
        fam, family_sort,
        Formula::implies(Formula::conj(std::move(empty_in), std::move(adjoin_closed)),
                         Formula::mem(args[0], fam_var)));
  }
  throw UnknownMacro("unknown defined predicate '" + name + "'");
}

}  // namespace toposlab
