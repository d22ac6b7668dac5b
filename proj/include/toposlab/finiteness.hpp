#pragma once

#include "toposlab/caps.hpp"
#include "toposlab/presheaf.hpp"

namespace toposlab {

/** The internal finiteness structure of a presheaf A: a subpresheaf of P(A)
 *  marking, at each stage, which subobjects-over-that-stage are finite. */
struct KFamily {
  Presheaf of;        // A
  Presheaf power;     // power_object(A); family indexes its fibers
  Subpresheaf family; // of `power`

  bool member(int stage, int power_elem) const { return family.contains(stage, power_elem); }
};

/** Least family containing the empty subobject everywhere and closed under
 *  adjoining one generated element, then under the restriction maps of P(A). */
KFamily kfinite_by_adjoin(const Presheaf& a, const Caps& caps = {});

/** Least family containing the empty subobject and every generated singleton,
 *  closed under stage-wise join and restriction. */
KFamily kfinite_by_union(const Presheaf& a, const Caps& caps = {});

/** Same computations over an already-built power object (shares fibers with
 *  an evaluator's sort interpretation). `power` must be a power object. */
KFamily kfinite_by_adjoin_on(const Presheaf& power, const Caps& caps = {});
KFamily kfinite_by_union_on(const Presheaf& power, const Caps& caps = {});

/** Membership of S (restricted to the down-set of `stage`) in the adjoin
 *  family of A. */
bool is_kfinite(const Presheaf& a, const Subpresheaf& s, int stage, const Caps& caps = {});

}  // namespace toposlab
