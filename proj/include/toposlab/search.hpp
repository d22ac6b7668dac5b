#pragma once

#include <string>
#include <vector>

#include "toposlab/model.hpp"
#include "toposlab/verify.hpp"

namespace toposlab {

/** Bounds for the countermodel search. Evaluation options (caps, budget,
 *  strictness) apply per candidate model. `jobs` > 1 spreads the per-poset
 *  shards over that many threads; results are merged in shard order, so the
 *  output is identical either way. `first_only` forces a sequential sweep
 *  (stopping early would otherwise depend on thread timing). */
struct SearchBounds {
  int max_poset = 2;
  int max_fiber = 2;
  bool first_only = false;
  int jobs = 1;
  EvalOptions opts;
};

/** A model on which the searched sentence is not internally valid. */
struct SearchHit {
  Model model;
  Report report;
};

struct SearchResult {
  std::vector<SearchHit> hits;
  long long models_scanned = 0;
};

/** Every poset with at most `max_elements` stages, one per isomorphism
 *  class, ordered by size and then by canonical relation code (the minimum
 *  of the adjacency bit matrix over all relabelings). Stages are named
 *  a, b, c, ... Throws CapExceeded past caps.max_poset_elements or past the
 *  built-in enumeration limit of 6. */
std::vector<FinPoset> enumerate_posets(int max_elements, const Caps& caps = {});

/** Every presheaf on `poset` with per-stage fibers of at most `max_fiber`
 *  elements (empty fibers included). Restriction tables are enumerated on
 *  covering pairs and composed; assignments whose composites disagree along
 *  different covering chains are skipped. Deterministic order: fiber sizes,
 *  then tables, odometer style. Throws CapExceeded past caps.max_hom
 *  presheaves. */
std::vector<Presheaf> enumerate_presheaves(const FinPoset& poset, int max_fiber,
                                           const Caps& caps = {});

/** Evaluates a closed sentence over every model assembled from
 *  enumerate_posets and enumerate_presheaves (one presheaf per base sort
 *  appearing in the sentence, in sorted name order) and reports those where
 *  the truth value is not top. Deterministic order; `first_only` stops at
 *  the first hit. Throws CapExceeded when the bounds exceed the caps and
 *  passes through evaluation errors. */
SearchResult search_counterexample(const Formula& sentence, const SearchBounds& bounds);

}  // namespace toposlab
