#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "toposlab/caps.hpp"
#include "toposlab/finiteness.hpp"
#include "toposlab/model.hpp"
#include "toposlab/typecheck.hpp"

namespace toposlab {

struct EvalOptions {
  /** Evaluate finiteness marker nodes through their raw higher-order
   *  expansion instead of the precomputed family. */
  bool strict_kfin = false;
  Caps caps{};
  long long budget = -1;  // -1: caps.budget
};

struct EvalStats {
  long long calls = 0;
  long long memo_hits = 0;
};

/** Stage-wise evaluator for one model. Sort interpretations and finiteness
 *  families are cached per evaluator; the formula memo is keyed by
 *  (node, stage, bindings restricted to the node's free variables). */
class Evaluator {
 public:
  explicit Evaluator(const Model& m, EvalOptions opts = {});

  /** Unit -> terminal, Empty -> initial, base names -> model presheaves,
   *  Pow -> power object (Omega = Pow(Unit)), Prod/Sum/Fun -> (co)product
   *  and exponential. Memoized. */
  const Presheaf& interpret(const Sort& s);

  /** Finiteness family for the element sort under `pow_sort`. Memoized. */
  const KFamily& finiteness_for(const Sort& pow_sort);

  /** One forcing query. `env` maps variable ids to fiber indices at `stage`
   *  (-1 for unbound); it must cover the sentence's free variables and may
   *  be shorter than the full variable table. */
  bool forces(int stage, const TypedSentence& sen, const std::vector<int>& env);

  /** Truth value of a closed sentence; asserts down-closure. */
  DownSet truth_value(const TypedSentence& sen);

  /** Truth value of an open sentence whose context variables are bound
   *  per stage by `stage_envs[stage]` (indexed by variable id). */
  DownSet truth_value(const TypedSentence& sen,
                      const std::vector<std::vector<int>>& stage_envs);

  /** Interpretation of a closed-enough term at a stage. */
  int eval_term(int stage, const TTerm& t, const std::vector<int>& env);

  const Model& model() const { return model_; }
  const EvalStats& stats() const { return stats_; }
  const EvalOptions& options() const { return opts_; }

 private:
  struct VecHash {
    size_t operator()(const std::vector<int>& v) const {
      size_t h = 1469598103934665603ull;
      for (int x : v) {
        h ^= static_cast<size_t>(static_cast<unsigned>(x));
        h *= 1099511628211ull;
      }
      return h;
    }
  };

  const Model& model_;
  EvalOptions opts_;
  long long budget_;
  EvalStats stats_;
  std::unordered_map<std::string, Presheaf> sort_cache_;
  std::unordered_map<std::string, KFamily> kfamily_cache_;
  const TypedSentence* current_ = nullptr;
  long long current_uid_ = -1;
  std::vector<const Presheaf*> var_interp_;
  std::unordered_map<std::vector<int>, bool, VecHash> memo_;

  void bind_sentence(const TypedSentence& sen);
  const Presheaf& var_presheaf(int v);
  bool forces_node(int stage, const TFormula& f, const std::vector<int>& env);
  std::vector<int> restrict_env(int from, int to, const std::vector<int>& env,
                                const std::vector<int>& vars);
  DownSet collect(const TypedSentence& sen, const std::vector<std::vector<int>>* stage_envs);
};

}  // namespace toposlab
