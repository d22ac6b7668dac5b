#pragma once

#include <string>
#include <vector>

#include "toposlab/forcing.hpp"

namespace toposlab {

enum class Verdict { InternallyValid, FailsAt, RefutationExhibited };

std::string verdict_name(Verdict v);

/** One named assertion evaluated while building a report. */
struct ReportCheck {
  std::string label;
  bool pass = false;
};

/** Outcome of one scenario: the sentence, its truth value, the verdict, and
 *  any instance-level assertions. InternallyValid iff the truth value is top;
 *  RefutationExhibited marks constructed instances whose point is a non-top
 *  value. */
struct Report {
  std::string scenario;
  std::string poset;
  std::vector<std::string> sorts;
  std::string sentence;
  DownSet truth;
  Verdict verdict = Verdict::InternallyValid;
  std::vector<std::string> fails_at;
  std::vector<std::string> witnesses;
  std::vector<ReportCheck> checks;
  EvalStats stats;

  bool passed() const;
  std::string to_text() const;
  /** Canonical machine-readable form; field names are stable. */
  std::string to_json() const;
};

std::string poset_summary(const FinPoset& p);

/** Stage list plus a TOP/BOTTOM marker, e.g. "{bot}" or "{bot,top} TOP". */
std::string truth_text(const DownSet& d);

/** Course-of-values induction for finite subobjects of the base sort:
 *  a family containing every finite set whose complemented proper subsets
 *  it contains must contain all finite sets. Expected InternallyValid. */
Report check_finite_induction(const Model& m, const std::string& base, EvalOptions opts = {});

/** No finite complemented proper subset maps onto the whole base sort:
 *  some element is always missed. Expected InternallyValid. */
Report check_dual_pigeonhole(const Model& m, const std::string& base, EvalOptions opts = {});

/** No functional relation injects base+1 into base, and none maps base onto
 *  base+1. `subobject_variant` only relabels the scenario: the caller runs it
 *  on a model whose sort is a subobject of a finite one. Expected
 *  InternallyValid. */
Report check_weak_pigeonhole(const Model& m, const std::string& base, bool subobject_variant,
                             EvalOptions opts = {});

/** The two-class quotient instance: X identifies the two points of 1+1 over
 *  the down-set u, f : X+1 -> X sends both classes to the first and the extra
 *  point to the second. The collision sentence's truth value is asserted to
 *  equal join(u, ~u), so it refutes the naive injection principle wherever
 *  excluded middle fails. */
struct CollisionInstance {
  Presheaf x;
  NatTrans f;
  Report report;
};
CollisionInstance build_collision_instance(const Model& m, const DownSet& u, EvalOptions opts = {});

/** A copy of the model extended with `name` interpreted as the subterminal
 *  presheaf of extent `u`: one point at the stages of u, nothing elsewhere.
 *  Externally a subobject of the terminal object, so a subset of a finite
 *  set; the pigeonhole scenarios use it for their subset variants. */
Model with_subterminal_sort(const Model& m, const std::string& name, const DownSet& u);

/** The subterminal instance: U is the subobject of 1 with extent u and
 *  f : U -> U+1 lands in the second summand. The sentence "some element of
 *  U+1 is outside the range of f" is asserted to have truth value
 *  join(u, ~u). */
struct UnreachedInstance {
  Subpresheaf u_sub;
  NatTrans f;
  Report report;
};
UnreachedInstance build_unreached_instance(const Model& m, const DownSet& u, EvalOptions opts = {});

/** The finiteness lemmas, conjoined over subobjects of the base sort:
 *  finite sets are empty or inhabited; complemented subsets of finite sets
 *  are finite; such subsets are proper or equal. Expected InternallyValid. */
Report check_finiteness_lemmas(const Model& m, const std::string& base, EvalOptions opts = {});

/** The fixed four-stage counterexample: an inhabited, internally finite
 *  object A with no global section, internally isomorphic to 1+1, such that
 *  A+1 has no global section outside the image of the collapse map A -> 1.
 *  Internal validity does not externalize. */
Report check_external_counterexample(EvalOptions opts = {});

}  // namespace toposlab
