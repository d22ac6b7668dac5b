#pragma once

#include <string>
#include <utility>
#include <vector>

#include "toposlab/logic.hpp"
#include "toposlab/model.hpp"

namespace toposlab {

/** A sort-annotated term. Variables carry alpha-renamed ids. */
struct TTerm {
  Term::Kind kind = Term::Kind::Unit;
  int var = -1;
  Sort sort;
  std::vector<TTerm> args;
};

/** A checked formula. Macro calls are gone: most expand structurally, while
 *  KFin(S) keeps a marker node whose single child is the full higher-order
 *  expansion, so the evaluator can choose between the precomputed finiteness
 *  family and the raw defining formula. */
struct TFormula {
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
    KFinMember
  };
  Kind kind = Kind::Truth;
  int node_id = 0;
  int var = -1;                // Forall/Exists: bound variable id
  Sort sort;                   // Forall/Exists: bound sort; KFinMember: Pow sort of the term
  std::vector<TTerm> terms;    // Eq {l,r}; Mem {elem,set}; KFinMember {set}
  std::vector<TFormula> kids;  // subformulas; KFinMember {expansion}
  std::vector<int> free_vars;  // sorted variable ids free below this node
};

struct TypedSentence {
  TFormula root;
  std::vector<Sort> var_sorts;
  std::vector<std::string> var_names;
  int num_ctx_vars = 0;  // leading var ids come from the caller's context
  int num_nodes = 0;
  /** Distinct per typecheck call; evaluators key per-sentence caches on it. */
  long long uid = -1;
};

/** Annotates every subterm with a sort, resolves base sorts against the
 *  model, alpha-renames variables to dense ids and expands macros. `ctx`
 *  lists free variables (they receive ids 0..n-1 in order). Throws
 *  SortMismatch, UnboundVariable, UnknownBaseSort, ArityError, UnknownMacro. */
TypedSentence typecheck(const Formula& f, const Model& m,
                        const std::vector<std::pair<std::string, Sort>>& ctx = {});

}  // namespace toposlab
