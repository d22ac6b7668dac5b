#include "toposlab/typecheck.hpp"

#include <algorithm>
#include <atomic>
#include <set>

namespace toposlab {

namespace {

/** Internal signal: inl/inr cannot be sorted without an expected sort. */
struct AmbiguousSum {
  int line, col;
};

class Checker {
 public:
  Checker(const Model& m, const std::vector<std::pair<std::string, Sort>>& ctx) : model_(m) {
    for (const auto& [name, sort] : ctx) {
      validate_sort(sort, 0, 0);
      scope_.emplace_back(name, new_var(name, sort));
    }
    num_ctx_ = static_cast<int>(ctx.size());
  }

  TypedSentence run(const Formula& f) {
    static std::atomic<long long> next_uid{0};
    TypedSentence out;
    out.root = formula(f);
    out.var_sorts = std::move(var_sorts_);
    out.var_names = std::move(var_names_);
    out.num_ctx_vars = num_ctx_;
    out.num_nodes = next_node_;
    out.uid = next_uid.fetch_add(1);
    return out;
  }

 private:
  const Model& model_;
  std::vector<std::pair<std::string, int>> scope_;
  std::vector<Sort> var_sorts_;
  std::vector<std::string> var_names_;
  int num_ctx_ = 0;
  int next_node_ = 0;

  int new_var(const std::string& name, const Sort& s) {
    var_sorts_.push_back(s);
    var_names_.push_back(name);
    return static_cast<int>(var_sorts_.size()) - 1;
  }

  void validate_sort(const Sort& s, int line, int col) {
    if (s.kind == Sort::Kind::Base && !model_.find(s.base))
      throw UnknownBaseSort("base sort '" + s.base + "' is not declared by the model" +
                            at(line, col));
    for (const Sort& a : s.args) validate_sort(a, line, col);
  }

  static std::string at(int line, int col) {
    if (line <= 0) return "";
    return " at " + std::to_string(line) + ":" + std::to_string(col);
  }

  // ---- terms ------------------------------------------------------------

  TTerm infer(const Term& t) {
    switch (t.kind) {
      case Term::Kind::Var: {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
          if (it->first == t.name) {
            TTerm out;
            out.kind = Term::Kind::Var;
            out.var = it->second;
            out.sort = var_sorts_[static_cast<size_t>(it->second)];
            return out;
          }
        throw UnboundVariable("variable '" + t.name + "' is not in scope" + at(t.line, t.col));
      }
      case Term::Kind::Unit: {
        TTerm out;
        out.kind = Term::Kind::Unit;
        out.sort = Sort::unit();
        return out;
      }
      case Term::Kind::Pair: {
        TTerm a = infer(t.args[0]), b = infer(t.args[1]);
        TTerm out;
        out.kind = Term::Kind::Pair;
        out.sort = Sort::prod(a.sort, b.sort);
        out.args = {std::move(a), std::move(b)};
        return out;
      }
      case Term::Kind::Fst:
      case Term::Kind::Snd: {
        TTerm inner = infer(t.args[0]);
        if (inner.sort.kind != Sort::Kind::Prod)
          throw SortMismatch("projection applied to a term of sort " +
                             sort_to_string(inner.sort) + at(t.line, t.col));
        TTerm out;
        out.kind = t.kind;
        out.sort = inner.sort.args[t.kind == Term::Kind::Fst ? 0 : 1];
        out.args = {std::move(inner)};
        return out;
      }
      case Term::Kind::Inl:
      case Term::Kind::Inr: throw AmbiguousSum{t.line, t.col};
      case Term::Kind::Apply: {
        TTerm f = infer(t.args[0]);
        if (f.sort.kind != Sort::Kind::Fun)
          throw SortMismatch("application of a term of sort " + sort_to_string(f.sort) +
                             at(t.line, t.col));
        TTerm x = check(t.args[1], f.sort.args[0]);
        TTerm out;
        out.kind = Term::Kind::Apply;
        out.sort = f.sort.args[1];
        out.args = {std::move(f), std::move(x)};
        return out;
      }
    }
    throw InternalError("unreachable term kind");
  }

  TTerm check(const Term& t, const Sort& expected) {
    switch (t.kind) {
      case Term::Kind::Inl:
      case Term::Kind::Inr: {
        if (expected.kind != Sort::Kind::Sum)
          throw SortMismatch("injection used where sort " + sort_to_string(expected) +
                             " is required" + at(t.line, t.col));
        TTerm inner = check(t.args[0], expected.args[t.kind == Term::Kind::Inl ? 0 : 1]);
        TTerm out;
        out.kind = t.kind;
        out.sort = expected;
        out.args = {std::move(inner)};
        return out;
      }
      case Term::Kind::Pair: {
        if (expected.kind != Sort::Kind::Prod)
          throw SortMismatch("pair used where sort " + sort_to_string(expected) +
                             " is required" + at(t.line, t.col));
        TTerm a = check(t.args[0], expected.args[0]);
        TTerm b = check(t.args[1], expected.args[1]);
        TTerm out;
        out.kind = Term::Kind::Pair;
        out.sort = expected;
        out.args = {std::move(a), std::move(b)};
        return out;
      }
      default: {
        TTerm out = infer(t);
        if (!(out.sort == expected))
          throw SortMismatch("term has sort " + sort_to_string(out.sort) + " where " +
                             sort_to_string(expected) + " is required" + at(t.line, t.col));
        return out;
      }
    }
  }

  // ---- formulas ----------------------------------------------------------

  static void collect_term_vars(const TTerm& t, std::set<int>& out) {
    if (t.kind == Term::Kind::Var) out.insert(t.var);
    for (const TTerm& a : t.args) collect_term_vars(a, out);
  }

  void finish(TFormula& f) {
    std::set<int> vars;
    for (const TTerm& t : f.terms) collect_term_vars(t, vars);
    for (const TFormula& k : f.kids) vars.insert(k.free_vars.begin(), k.free_vars.end());
    if (f.kind == TFormula::Kind::Forall || f.kind == TFormula::Kind::Exists) vars.erase(f.var);
    f.free_vars.assign(vars.begin(), vars.end());
    f.node_id = next_node_++;
  }

  TFormula formula(const Formula& f) {
    TFormula out;
    switch (f.kind) {
      case Formula::Kind::Truth: out.kind = TFormula::Kind::Truth; break;
      case Formula::Kind::Falsity: out.kind = TFormula::Kind::Falsity; break;
      case Formula::Kind::Eq: {
        out.kind = TFormula::Kind::Eq;
        TTerm l, r;
        try {
          l = infer(f.terms[0]);
          r = check(f.terms[1], l.sort);
        } catch (const AmbiguousSum&) {
          try {
            r = infer(f.terms[1]);
          } catch (const AmbiguousSum& a) {
            throw SortMismatch("cannot infer the sort of either side of '='" +
                               at(a.line, a.col));
          }
          l = check(f.terms[0], r.sort);
        }
        out.terms = {std::move(l), std::move(r)};
        break;
      }
      case Formula::Kind::Mem: {
        out.kind = TFormula::Kind::Mem;
        TTerm set;
        try {
          set = infer(f.terms[1]);
        } catch (const AmbiguousSum& a) {
          throw SortMismatch("cannot infer the sort of the right side of 'in'" +
                             at(a.line, a.col));
        }
        if (set.sort.kind != Sort::Kind::Pow)
          throw SortMismatch("the right side of 'in' has sort " + sort_to_string(set.sort) +
                             ", which is not a power sort" + at(f.line, f.col));
        TTerm elem = check(f.terms[0], set.sort.args[0]);
        out.terms = {std::move(elem), std::move(set)};
        break;
      }
      case Formula::Kind::TermAtom: {
        // A bare term stands for "the point lies in it": it must denote a
        // truth value.
        out.kind = TFormula::Kind::Mem;
        TTerm t = check(f.terms[0], Sort::omega());
        TTerm pt;
        pt.kind = Term::Kind::Unit;
        pt.sort = Sort::unit();
        out.terms = {std::move(pt), std::move(t)};
        break;
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Implies: {
        out.kind = f.kind == Formula::Kind::And   ? TFormula::Kind::And
                   : f.kind == Formula::Kind::Or ? TFormula::Kind::Or
                                                 : TFormula::Kind::Implies;
        out.kids.push_back(formula(f.kids[0]));
        out.kids.push_back(formula(f.kids[1]));
        break;
      }
      case Formula::Kind::Not:
        out.kind = TFormula::Kind::Not;
        out.kids.push_back(formula(f.kids[0]));
        break;
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        out.kind =
            f.kind == Formula::Kind::Forall ? TFormula::Kind::Forall : TFormula::Kind::Exists;
        validate_sort(f.sort, f.line, f.col);
        out.sort = f.sort;
        out.var = new_var(f.name, f.sort);
        scope_.emplace_back(f.name, out.var);
        out.kids.push_back(formula(f.kids[0]));
        scope_.pop_back();
        break;
      }
      case Formula::Kind::MacroCall: {
        std::vector<Sort> arg_sorts;
        std::vector<TTerm> targs;
        for (const Term& a : f.terms) {
          TTerm ta;
          try {
            ta = infer(a);
          } catch (const AmbiguousSum& amb) {
            throw SortMismatch("cannot infer the sort of an argument of " + f.name +
                               at(amb.line, amb.col));
          }
          arg_sorts.push_back(ta.sort);
          targs.push_back(std::move(ta));
        }
        Formula expanded = expand_macro(f.name, f.terms, arg_sorts);
        if (f.name == "KFin") {
          out.kind = TFormula::Kind::KFinMember;
          out.sort = arg_sorts[0];
          out.terms = {std::move(targs[0])};
          out.kids.push_back(formula(expanded));
          break;
        }
        return formula(expanded);
      }
    }
    finish(out);
    return out;
  }
};

}  // namespace

TypedSentence typecheck(const Formula& f, const Model& m,
                        const std::vector<std::pair<std::string, Sort>>& ctx) {
  Checker c(m, ctx);
  return c.run(f);
}

}  // namespace toposlab
