#pragma once

#include <string>
#include <vector>

#include "toposlab/errors.hpp"

namespace toposlab {

/** A sort expression. Omega is represented canonically as Pow(Unit) and
 *  printed back as "Omega". */
struct Sort {
  enum class Kind { Unit, Empty, Base, Pow, Prod, Sum, Fun };
  Kind kind = Kind::Unit;
  std::string base;        // Kind::Base only
  std::vector<Sort> args;  // 1 for Pow, 2 for Prod/Sum/Fun

  static Sort unit() { return {}; }
  static Sort empty() { return {Kind::Empty, "", {}}; }
  static Sort base_sort(std::string name) { return {Kind::Base, std::move(name), {}}; }
  static Sort pow(Sort s) { return {Kind::Pow, "", {std::move(s)}}; }
  static Sort omega() { return pow(unit()); }
  static Sort prod(Sort a, Sort b) { return {Kind::Prod, "", {std::move(a), std::move(b)}}; }
  static Sort sum(Sort a, Sort b) { return {Kind::Sum, "", {std::move(a), std::move(b)}}; }
  static Sort fun(Sort a, Sort b) { return {Kind::Fun, "", {std::move(a), std::move(b)}}; }

  bool operator==(const Sort& o) const {
    return kind == o.kind && base == o.base && args == o.args;
  }
  bool is_omega() const { return kind == Kind::Pow && args[0].kind == Kind::Unit; }
};

std::string sort_to_string(const Sort& s);

struct Term {
  enum class Kind { Var, Pair, Fst, Snd, Inl, Inr, Unit, Apply };
  Kind kind = Kind::Unit;
  std::string name;        // Kind::Var only
  std::vector<Term> args;  // children; Apply = {function, argument}
  int line = 0, col = 0;

  static Term var(std::string n) { return {Kind::Var, std::move(n), {}, 0, 0}; }
  static Term unit_point() { return {Kind::Unit, "", {}, 0, 0}; }
  static Term pair(Term a, Term b) { return {Kind::Pair, "", {std::move(a), std::move(b)}, 0, 0}; }
  static Term fst(Term t) { return {Kind::Fst, "", {std::move(t)}, 0, 0}; }
  static Term snd(Term t) { return {Kind::Snd, "", {std::move(t)}, 0, 0}; }
  static Term inl(Term t) { return {Kind::Inl, "", {std::move(t)}, 0, 0}; }
  static Term inr(Term t) { return {Kind::Inr, "", {std::move(t)}, 0, 0}; }
  static Term apply(Term f, Term x) {
    return {Kind::Apply, "", {std::move(f), std::move(x)}, 0, 0};
  }

  bool operator==(const Term& o) const {
    return kind == o.kind && name == o.name && args == o.args;
  }
};

std::string term_to_string(const Term& t);

/** An unchecked formula. TermAtom is a bare term in formula position; it
 *  must have sort Omega and stands for its own truth. */
struct Formula {
  enum class Kind {
    Truth,
    Falsity,
    Eq,
    Mem,
    And,
    Or,
    Implies,
    Not,
    Forall,
    Exists,
    MacroCall,
    TermAtom
  };
  Kind kind = Kind::Truth;
  std::string name;           // bound variable or macro name
  Sort sort;                  // quantifier sort
  std::vector<Term> terms;    // Eq {l,r}; Mem {elem,set}; TermAtom {t}; macro args
  std::vector<Formula> kids;  // subformulas
  int line = 0, col = 0;

  static Formula truth() { return {}; }
  static Formula falsity() { return make(Kind::Falsity); }
  static Formula eq(Term a, Term b) {
    Formula f = make(Kind::Eq);
    f.terms = {std::move(a), std::move(b)};
    return f;
  }
  static Formula mem(Term elem, Term set) {
    Formula f = make(Kind::Mem);
    f.terms = {std::move(elem), std::move(set)};
    return f;
  }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) {
    return binary(Kind::Implies, std::move(a), std::move(b));
  }
  static Formula neg(Formula a) {
    Formula f = make(Kind::Not);
    f.kids = {std::move(a)};
    return f;
  }
  static Formula forall(std::string var, Sort s, Formula body) {
    return quant(Kind::Forall, std::move(var), std::move(s), std::move(body));
  }
  static Formula exists(std::string var, Sort s, Formula body) {
    return quant(Kind::Exists, std::move(var), std::move(s), std::move(body));
  }
  static Formula macro(std::string name, std::vector<Term> args) {
    Formula f = make(Kind::MacroCall);
    f.name = std::move(name);
    f.terms = std::move(args);
    return f;
  }
  static Formula term_atom(Term t) {
    Formula f = make(Kind::TermAtom);
    f.terms = {std::move(t)};
    return f;
  }

  bool operator==(const Formula& o) const {
    return kind == o.kind && name == o.name && sort == o.sort && terms == o.terms &&
           kids == o.kids;
  }

 private:
  static Formula make(Kind k) {
    Formula f;
    f.kind = k;
    return f;
  }
  static Formula binary(Kind k, Formula a, Formula b) {
    Formula f = make(k);
    f.kids = {std::move(a), std::move(b)};
    return f;
  }
  static Formula quant(Kind k, std::string var, Sort s, Formula body) {
    Formula f = make(k);
    f.name = std::move(var);
    f.sort = std::move(s);
    f.kids = {std::move(body)};
    return f;
  }
};

std::string formula_to_string(const Formula& f);

/** Parses a sentence; throws SyntaxError with position on bad input. */
Formula parse_formula(const std::string& text);

/** Parses a sort expression alone (used by tests and the CLI). */
Sort parse_sort(const std::string& text);

/** Names of the built-in defined predicates. */
const std::vector<std::string>& macro_names();
bool is_macro_name(const std::string& name);

/** Expands one defined predicate. `arg_sorts` are the already-inferred sorts
 *  of `args`. The result is macro-free; bound variables are chosen fresh
 *  against every identifier occurring in the arguments. Throws ArityError or
 *  SortMismatch when the call does not match the macro table, UnknownMacro
 *  for names outside it. */
Formula expand_macro(const std::string& name, const std::vector<Term>& args,
                     const std::vector<Sort>& arg_sorts);

}  // namespace toposlab
