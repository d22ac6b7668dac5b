#include "classical.hpp"

#include <limits>
#include <set>

#include "toposlab/errors.hpp"

namespace toposlab::testsupport {

namespace {

long long checked_mul(long long a, long long b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<long long>::max() / b)
    throw CapExceeded("classical cardinality overflows");
  return a * b;
}

long long checked_pow(long long base, long long exp) {
  long long out = 1;
  for (long long i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

}  // namespace

ClassicalEval::ClassicalEval(const Model& m, long long card_cap) : cap_(card_cap) {
  if (m.poset.size() != 1)
    throw InputError("classical evaluator requires a one-stage model");
  for (const auto& [name, p] : m.sorts)
    sizes_.emplace_back(name, static_cast<long long>(p.fiber_size(0)));
}

long long ClassicalEval::card(const Sort& s) const {
  long long n = 0;
  switch (s.kind) {
    case Sort::Kind::Unit:
      n = 1;
      break;
    case Sort::Kind::Empty:
      n = 0;
      break;
    case Sort::Kind::Base: {
      bool found = false;
      for (const auto& [name, size] : sizes_)
        if (name == s.base) {
          n = size;
          found = true;
        }
      if (!found) throw UnknownBaseSort("unknown base sort '" + s.base + "'");
      break;
    }
    case Sort::Kind::Pow: {
      long long a = card(s.args[0]);
      if (a > 62) throw CapExceeded("classical power set over " + std::to_string(a));
      n = 1LL << a;
      break;
    }
    case Sort::Kind::Prod:
      n = checked_mul(card(s.args[0]), card(s.args[1]));
      break;
    case Sort::Kind::Sum: {
      long long a = card(s.args[0]), b = card(s.args[1]);
      if (a > std::numeric_limits<long long>::max() - b)
        throw CapExceeded("classical cardinality overflows");
      n = a + b;
      break;
    }
    case Sort::Kind::Fun:
      n = checked_pow(card(s.args[1]), card(s.args[0]));
      break;
  }
  if (n > cap_)
    throw CapExceeded("classical cardinality of " + sort_to_string(s) + " exceeds cap");
  return n;
}

long long ClassicalEval::eval_term(const TTerm& t, const std::vector<long long>& env) const {
  switch (t.kind) {
    case Term::Kind::Var: {
      long long v = env[static_cast<size_t>(t.var)];
      if (v < 0) throw InternalError("classical evaluation hit an unbound variable");
      return v;
    }
    case Term::Kind::Unit:
      return 0;
    case Term::Kind::Pair:
      return eval_term(t.args[0], env) * card(t.sort.args[1]) + eval_term(t.args[1], env);
    case Term::Kind::Fst:
      return eval_term(t.args[0], env) / card(t.args[0].sort.args[1]);
    case Term::Kind::Snd:
      return eval_term(t.args[0], env) % card(t.args[0].sort.args[1]);
    case Term::Kind::Inl:
      return eval_term(t.args[0], env);
    case Term::Kind::Inr:
      return card(t.sort.args[0]) + eval_term(t.args[0], env);
    case Term::Kind::Apply: {
      long long f = eval_term(t.args[0], env);
      long long x = eval_term(t.args[1], env);
      long long n = card(t.args[0].sort.args[0]);
      long long b = card(t.args[0].sort.args[1]);
      // slot 0 is the most significant digit
      return (f / checked_pow(b, n - 1 - x)) % b;
    }
  }
  throw InternalError("unhandled term kind");
}

bool ClassicalEval::kfin_member(long long ground_card, long long subset) const {
  if (ground_card > 62) throw CapExceeded("classical finiteness family too large");
  std::set<long long> family{0};
  std::vector<long long> work{0};
  while (!work.empty()) {
    long long s = work.back();
    work.pop_back();
    for (long long x = 0; x < ground_card; ++x) {
      long long ext = s | (1LL << x);
      if (family.insert(ext).second) work.push_back(ext);
    }
  }
  return family.count(subset) > 0;
}

bool ClassicalEval::eval(const TFormula& f, std::vector<long long>& env) const {
  switch (f.kind) {
    case TFormula::Kind::Truth:
      return true;
    case TFormula::Kind::Falsity:
      return false;
    case TFormula::Kind::Eq:
      return eval_term(f.terms[0], env) == eval_term(f.terms[1], env);
    case TFormula::Kind::Mem: {
      long long elem = eval_term(f.terms[0], env);
      long long set = eval_term(f.terms[1], env);
      return (set >> elem) & 1;
    }
    case TFormula::Kind::And:
      return eval(f.kids[0], env) && eval(f.kids[1], env);
    case TFormula::Kind::Or:
      return eval(f.kids[0], env) || eval(f.kids[1], env);
    case TFormula::Kind::Implies:
      return !eval(f.kids[0], env) || eval(f.kids[1], env);
    case TFormula::Kind::Not:
      return !eval(f.kids[0], env);
    case TFormula::Kind::Forall: {
      long long n = card(f.sort);
      for (long long v = 0; v < n; ++v) {
        env[static_cast<size_t>(f.var)] = v;
        bool ok = eval(f.kids[0], env);
        env[static_cast<size_t>(f.var)] = -1;
        if (!ok) return false;
      }
      return true;
    }
    case TFormula::Kind::Exists: {
      long long n = card(f.sort);
      for (long long v = 0; v < n; ++v) {
        env[static_cast<size_t>(f.var)] = v;
        bool ok = eval(f.kids[0], env);
        env[static_cast<size_t>(f.var)] = -1;
        if (ok) return true;
      }
      return false;
    }
    case TFormula::Kind::KFinMember:
      return kfin_member(card(f.sort.args[0]), eval_term(f.terms[0], env));
  }
  throw InternalError("unhandled formula kind");
}

bool ClassicalEval::holds(const TypedSentence& sen, std::vector<long long> env) const {
  env.resize(sen.var_sorts.size(), -1);
  return eval(sen.root, env);
}

bool ClassicalEval::holds(const TypedSentence& sen) const { return holds(sen, {}); }

}  // namespace toposlab::testsupport
