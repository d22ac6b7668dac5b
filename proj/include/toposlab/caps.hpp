#pragma once

#include <cstdint>

namespace toposlab {

// Resource caps. Enumerations fail loudly with CapExceeded instead of
// truncating; the evaluator aborts with BudgetExceeded past `budget`.
struct Caps {
  int max_poset_elements = 8;       // stages per poset
  int max_fiber = 6;                // per-stage fiber size of an input presheaf
  long max_power_fiber = 4096;      // per-stage fiber size of a power/exponential object
  long max_downsets = 4096;         // all_downsets enumeration
  long max_hom = 65536;             // natural-transformation enumeration
  long long budget = 100000000LL;   // visited (node, stage, env) triples per evaluation

  // Caps sized for the bundled scenario suite (power objects over
  // three-stage down-sets of 6-element fibers reach 15625).
  static Caps suite() {
    Caps c;
    c.max_power_fiber = 65536;
    return c;
  }
};

}  // namespace toposlab
