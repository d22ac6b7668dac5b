#include "toposlab/forcing.hpp"

namespace toposlab {

Evaluator::Evaluator(const Model& m, EvalOptions opts) : model_(m), opts_(opts) {
  budget_ = opts_.budget < 0 ? opts_.caps.budget : opts_.budget;
}

const Presheaf& Evaluator::interpret(const Sort& s) {
  std::string key = sort_to_string(s);
  auto it = sort_cache_.find(key);
  if (it != sort_cache_.end()) return it->second;
  Presheaf out;
  switch (s.kind) {
    case Sort::Kind::Unit: out = terminal_presheaf(model_.poset); break;
    case Sort::Kind::Empty: out = initial_presheaf(model_.poset); break;
    case Sort::Kind::Base: out = model_.at(s.base); break;
    case Sort::Kind::Pow: out = power_object(interpret(s.args[0]), opts_.caps); break;
    case Sort::Kind::Prod: {
      const Presheaf& l = interpret(s.args[0]);
      const Presheaf& r = interpret(s.args[1]);
      out = product(l, r).obj;
      break;
    }
    case Sort::Kind::Sum: {
      const Presheaf& l = interpret(s.args[0]);
      const Presheaf& r = interpret(s.args[1]);
      out = coproduct(l, r).obj;
      break;
    }
    case Sort::Kind::Fun: {
      const Presheaf& l = interpret(s.args[0]);
      const Presheaf& r = interpret(s.args[1]);
      out = exponential(l, r, opts_.caps);
      break;
    }
  }
  return sort_cache_.emplace(std::move(key), std::move(out)).first->second;
}

const KFamily& Evaluator::finiteness_for(const Sort& pow_sort) {
  std::string key = sort_to_string(pow_sort);
  auto it = kfamily_cache_.find(key);
  if (it != kfamily_cache_.end()) return it->second;
  KFamily k = kfinite_by_adjoin_on(interpret(pow_sort), opts_.caps);
  return kfamily_cache_.emplace(std::move(key), std::move(k)).first->second;
}

void Evaluator::bind_sentence(const TypedSentence& sen) {
  // The pointer is refreshed every call (the previous sentence may be gone);
  // per-sentence caches survive only for the same typecheck result.
  current_ = &sen;
  if (sen.uid == current_uid_) return;
  current_uid_ = sen.uid;
  memo_.clear();
  // Lazily interpreted: a sort mentioned only inside an unevaluated
  // finiteness expansion must not force construction of its presheaf.
  var_interp_.assign(sen.var_sorts.size(), nullptr);
}

const Presheaf& Evaluator::var_presheaf(int v) {
  const Presheaf*& slot = var_interp_[static_cast<size_t>(v)];
  if (!slot) slot = &interpret(current_->var_sorts[static_cast<size_t>(v)]);
  return *slot;
}

int Evaluator::eval_term(int stage, const TTerm& t, const std::vector<int>& env) {
  switch (t.kind) {
    case Term::Kind::Var: {
      int v = env[static_cast<size_t>(t.var)];
      if (v < 0) throw InternalError("unbound variable during evaluation");
      return v;
    }
    case Term::Kind::Unit: return 0;
    case Term::Kind::Pair: {
      int l = eval_term(stage, t.args[0], env);
      int r = eval_term(stage, t.args[1], env);
      return pair_index(interpret(t.sort), stage, l, r);
    }
    case Term::Kind::Fst:
      return pair_split(interpret(t.args[0].sort), stage, eval_term(stage, t.args[0], env)).first;
    case Term::Kind::Snd:
      return pair_split(interpret(t.args[0].sort), stage, eval_term(stage, t.args[0], env))
          .second;
    case Term::Kind::Inl:
      return inl_index(interpret(t.sort), stage, eval_term(stage, t.args[0], env));
    case Term::Kind::Inr:
      return inr_index(interpret(t.sort), stage, eval_term(stage, t.args[0], env));
    case Term::Kind::Apply: {
      const Presheaf& exp = interpret(t.args[0].sort);
      int f = eval_term(stage, t.args[0], env);
      int x = eval_term(stage, t.args[1], env);
      return exp.exp_prov()->apply(stage, f, x);
    }
  }
  throw InternalError("unreachable term kind");
}

std::vector<int> Evaluator::restrict_env(int from, int to, const std::vector<int>& env,
                                         const std::vector<int>& vars) {
  std::vector<int> out(env.size(), -1);
  for (int v : vars) {
    int val = env[static_cast<size_t>(v)];
    if (val < 0) throw InternalError("free variable unbound during restriction");
    out[static_cast<size_t>(v)] = from == to ? val : var_presheaf(v).restrict_elem(from, to, val);
  }
  return out;
}

bool Evaluator::forces_node(int stage, const TFormula& f, const std::vector<int>& env) {
  if (++stats_.calls > budget_)
    throw BudgetExceeded("evaluation budget of " + std::to_string(budget_) + " steps exhausted");

  bool memoize = false;
  switch (f.kind) {
    case TFormula::Kind::Implies:
    case TFormula::Kind::Not:
    case TFormula::Kind::Forall:
    case TFormula::Kind::Exists:
    case TFormula::Kind::KFinMember: memoize = true; break;
    default: break;
  }
  std::vector<int> key;
  if (memoize) {
    key.reserve(2 + f.free_vars.size());
    key.push_back(f.node_id);
    key.push_back(stage);
    for (int v : f.free_vars) key.push_back(env[static_cast<size_t>(v)]);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second;
    }
  }

  const FinPoset& poset = model_.poset;
  bool result = false;
  switch (f.kind) {
    case TFormula::Kind::Truth: result = true; break;
    case TFormula::Kind::Falsity: result = false; break;
    case TFormula::Kind::Eq:
      result = eval_term(stage, f.terms[0], env) == eval_term(stage, f.terms[1], env);
      break;
    case TFormula::Kind::Mem: {
      int elem = eval_term(stage, f.terms[0], env);
      int set = eval_term(stage, f.terms[1], env);
      result = interpret(f.terms[1].sort).power_prov()->member(stage, set, elem);
      break;
    }
    case TFormula::Kind::And:
      result = forces_node(stage, f.kids[0], env) && forces_node(stage, f.kids[1], env);
      break;
    case TFormula::Kind::Or:
      result = forces_node(stage, f.kids[0], env) || forces_node(stage, f.kids[1], env);
      break;
    case TFormula::Kind::Implies: {
      result = true;
      for (int q = 0; q < poset.size() && result; ++q) {
        if (!poset.leq(q, stage)) continue;
        std::vector<int> envq = restrict_env(stage, q, env, f.free_vars);
        if (forces_node(q, f.kids[0], envq) && !forces_node(q, f.kids[1], envq)) result = false;
      }
      break;
    }
    case TFormula::Kind::Not: {
      result = true;
      for (int q = 0; q < poset.size() && result; ++q) {
        if (!poset.leq(q, stage)) continue;
        std::vector<int> envq = restrict_env(stage, q, env, f.free_vars);
        if (forces_node(q, f.kids[0], envq)) result = false;
      }
      break;
    }
    case TFormula::Kind::Forall: {
      const Presheaf& dom = interpret(f.sort);
      result = true;
      for (int q = 0; q < poset.size() && result; ++q) {
        if (!poset.leq(q, stage)) continue;
        std::vector<int> envq = restrict_env(stage, q, env, f.free_vars);
        for (int a = 0; a < dom.fiber_size(q) && result; ++a) {
          envq[static_cast<size_t>(f.var)] = a;
          if (!forces_node(q, f.kids[0], envq)) result = false;
        }
      }
      break;
    }
    case TFormula::Kind::Exists: {
      const Presheaf& dom = interpret(f.sort);
      std::vector<int> envx = env;
      result = false;
      for (int a = 0; a < dom.fiber_size(stage) && !result; ++a) {
        envx[static_cast<size_t>(f.var)] = a;
        if (forces_node(stage, f.kids[0], envx)) result = true;
      }
      break;
    }
    case TFormula::Kind::KFinMember: {
      if (opts_.strict_kfin) {
        result = forces_node(stage, f.kids[0], env);
      } else {
        int set = eval_term(stage, f.terms[0], env);
        result = finiteness_for(f.terms[0].sort).member(stage, set);
      }
      break;
    }
  }

  if (memoize) memo_.emplace(std::move(key), result);
  return result;
}

bool Evaluator::forces(int stage, const TypedSentence& sen, const std::vector<int>& env) {
  bind_sentence(sen);
  if (env.size() > sen.var_sorts.size())
    throw InputError("more bindings than sentence variables");
  // Quantifier nodes write into the slots of their bound variables, so the
  // working vector always spans the whole variable table.
  std::vector<int> full(sen.var_sorts.size(), -1);
  std::copy(env.begin(), env.end(), full.begin());
  return forces_node(stage, sen.root, full);
}

DownSet Evaluator::collect(const TypedSentence& sen,
                           const std::vector<std::vector<int>>* stage_envs) {
  bind_sentence(sen);
  const FinPoset& poset = model_.poset;
  DownSet out;
  out.poset = poset;
  for (int p = 0; p < poset.size(); ++p) {
    std::vector<int> env(sen.var_sorts.size(), -1);
    if (stage_envs) {
      const auto& given = (*stage_envs)[static_cast<size_t>(p)];
      if (given.size() > env.size())
        throw InputError("more bindings than sentence variables");
      for (size_t v = 0; v < given.size(); ++v) env[v] = given[v];
    }
    if (forces_node(p, sen.root, env)) out.bits |= StageMask(1) << p;
  }
  // Forcing is monotone; a violation means an evaluator defect.
  for (int p = 0; p < poset.size(); ++p)
    for (int q = 0; q < poset.size(); ++q)
      if (poset.leq(q, p) && out.contains(p) && !out.contains(q))
        throw InternalError("monotonicity violated between stages '" + poset.element(p) +
                            "' and '" + poset.element(q) + "'");
  return out;
}

DownSet Evaluator::truth_value(const TypedSentence& sen) {
  if (!sen.root.free_vars.empty())
    throw InputError("truth_value needs a closed sentence; bind context variables per stage");
  return collect(sen, nullptr);
}

DownSet Evaluator::truth_value(const TypedSentence& sen,
                               const std::vector<std::vector<int>>& stage_envs) {
  if (static_cast<int>(stage_envs.size()) != model_.poset.size())
    throw InputError("expected one binding vector per stage");
  return collect(sen, &stage_envs);
}

}  // namespace toposlab
