#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "toposlab/caps.hpp"
#include "toposlab/errors.hpp"
#include "toposlab/poset.hpp"

namespace toposlab {

using FiberMask = std::uint64_t;

/** One element of a power-object fiber at stage p: a subpresheaf of the
 *  argument restricted to the down-set of p, stored as per-stage bitmasks
 *  (zero outside that down-set). */
using SubChoice = std::vector<FiberMask>;

/** One element of an exponential fiber at p (or a whole natural
 *  transformation): per-stage function tables, empty outside the relevant
 *  down-set. */
using FamilyTables = std::vector<std::vector<int>>;

/** A finite-set-valued presheaf on a FinPoset. Fibers are ordered lists of
 *  named elements; for q <= p the restriction map fiber(p) -> fiber(q) is an
 *  index table. Functoriality is checked at construction. Immutable. */
class Presheaf {
 public:
  struct Data;

  Presheaf() = default;
  explicit Presheaf(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  /** Checked constructor. `tables` maps (p,q) with q < p to an index table
   *  of size fiber(p); missing pairs default to the identity when the names
   *  of fiber(p) all appear in fiber(q), else MissingTable. Throws
   *  FunctorialityError with a witnessing triple, FiberCapExceeded past
   *  caps.max_fiber. */
  static Presheaf validate(const FinPoset& poset, std::vector<std::vector<std::string>> fibers,
                           const std::map<std::pair<int, int>, std::vector<int>>& tables,
                           const Caps& caps = {});

  bool valid() const { return d_ != nullptr; }
  const FinPoset& poset() const;
  int fiber_size(int p) const;
  const std::vector<std::string>& fiber(int p) const;
  const std::string& elem_name(int p, int x) const;
  int elem_index(int p, const std::string& name) const;

  /** Image of element x of fiber(p) under the restriction to q <= p. */
  int restrict_elem(int p, int q, int x) const;

  /** Pointer identity; presheaves are shared immutable values. */
  bool same(const Presheaf& other) const { return d_ == other.d_; }

  // Provenance of constructed presheaves (null when not of that kind).
  const Presheaf* product_left() const;
  const Presheaf* product_right() const;
  const Presheaf* coproduct_left() const;
  const Presheaf* coproduct_right() const;
  const struct PowerProvData* power_prov() const;
  const struct ExpProvData* exp_prov() const;

  const Data& data() const { return *d_; }

 private:
  std::shared_ptr<const Data> d_;
};

struct PairProv {
  Presheaf left, right;
  bool is_coproduct = false;
};

struct PowerProvData {
  Presheaf arg;
  /** choices[p], sorted lexicographically by per-stage masks in element
   *  order; fiber names are rendered from these. */
  std::vector<std::vector<SubChoice>> choices;
  /** Index of `sc` (a choice over the down-set of p) in choices[p]; -1 if absent. */
  int index_of(int p, const SubChoice& sc) const;
  bool member(int p, int choice, int elem) const {
    return (choices[static_cast<size_t>(p)][static_cast<size_t>(choice)][static_cast<size_t>(p)] >> elem) & 1u;
  }
};

struct ExpProvData {
  Presheaf from, to;
  /** families[p], sorted lexicographically by per-stage tables in element order. */
  std::vector<std::vector<FamilyTables>> families;
  int index_of(int p, const FamilyTables& fam) const;
  int apply(int p, int family, int x) const {
    return families[static_cast<size_t>(p)][static_cast<size_t>(family)][static_cast<size_t>(p)][static_cast<size_t>(x)];
  }
};

struct Presheaf::Data {
  FinPoset poset;
  std::vector<std::vector<std::string>> fibers;
  /** rest[p][q] defined iff q <= p, q != p. */
  std::vector<std::vector<std::vector<int>>> rest;
  std::variant<std::monostate, PairProv, PowerProvData, ExpProvData> prov;
};

inline const FinPoset& Presheaf::poset() const { return d_->poset; }
inline int Presheaf::fiber_size(int p) const {
  return static_cast<int>(d_->fibers[static_cast<size_t>(p)].size());
}
inline const std::vector<std::string>& Presheaf::fiber(int p) const {
  return d_->fibers[static_cast<size_t>(p)];
}
inline const std::string& Presheaf::elem_name(int p, int x) const {
  return d_->fibers[static_cast<size_t>(p)][static_cast<size_t>(x)];
}
inline int Presheaf::restrict_elem(int p, int q, int x) const {
  return p == q ? x : d_->rest[static_cast<size_t>(p)][static_cast<size_t>(q)][static_cast<size_t>(x)];
}

/** A natural transformation between presheaves on one poset. */
struct NatTrans {
  Presheaf source, target;
  std::vector<std::vector<int>> comp;  // comp[p] : source fiber -> target fiber

  /** Checks naturality squares; throws FunctorialityError on violation. */
  static NatTrans validate(Presheaf source, Presheaf target, std::vector<std::vector<int>> comp);
  int at(int p, int x) const { return comp[static_cast<size_t>(p)][static_cast<size_t>(x)]; }
};

/** A restriction-closed choice of subsets of a presheaf's fibers. */
struct Subpresheaf {
  Presheaf of;
  std::vector<FiberMask> chosen;  // chosen[p] over fiber(p)

  /** Checks restriction-closure. */
  static Subpresheaf validate(Presheaf of, std::vector<FiberMask> chosen);
  static Subpresheaf empty(const Presheaf& of);
  static Subpresheaf full(const Presheaf& of);
  bool contains(int p, int x) const { return (chosen[static_cast<size_t>(p)] >> x) & 1u; }
  bool operator==(const Subpresheaf& other) const {
    return of.same(other.of) && chosen == other.chosen;
  }
};

// Finite (co)limits; all sharing the poset of their arguments.
Presheaf terminal_presheaf(const FinPoset& p);
Presheaf initial_presheaf(const FinPoset& p);

struct ProductResult {
  Presheaf obj;
  NatTrans proj_left, proj_right;
};
ProductResult product(const Presheaf& a, const Presheaf& b);
int pair_index(const Presheaf& prod, int p, int left, int right);
std::pair<int, int> pair_split(const Presheaf& prod, int p, int idx);

struct CoproductResult {
  Presheaf obj;
  NatTrans inj_left, inj_right;
};
CoproductResult coproduct(const Presheaf& a, const Presheaf& b);
/** Decodes a coproduct fiber element: (tag, index in summand); tag 0 = left. */
std::pair<int, int> coproduct_split(const Presheaf& sum, int p, int idx);
int inl_index(const Presheaf& sum, int p, int left);
int inr_index(const Presheaf& sum, int p, int right);

enum class ConstructKind { Terminal, Initial, Product, Coproduct };
struct ConstructResult {
  Presheaf obj;
  std::vector<NatTrans> maps;  // projections or injections
};
ConstructResult construct(ConstructKind kind, const FinPoset& poset,
                          const std::vector<Presheaf>& args);

/** Power object: fiber at p enumerates the subpresheaves of F restricted to
 *  the down-set of p; restriction intersects down to the smaller down-set.
 *  power_object(terminal) is the subobject classifier. */
Presheaf power_object(const Presheaf& f, const Caps& caps = {});

/** Exponential: fiber at p enumerates commuting families of per-stage maps
 *  {h_q : F(q) -> G(q)} over q <= p; restriction truncates the family. */
Presheaf exponential(const Presheaf& f, const Presheaf& g, const Caps& caps = {});

/** All natural transformations F => G, sorted by their flattened tables. */
std::vector<NatTrans> enumerate_nat_trans(const Presheaf& f, const Presheaf& g,
                                          const Caps& caps = {});

/** Compatible element families (one fiber index per stage); empty when some
 *  fiber is empty or no family commutes. */
std::vector<std::vector<int>> global_sections(const Presheaf& f, const Caps& caps = {});

/** Pointwise image of a natural transformation (restriction-closed by
 *  naturality). */
Subpresheaf image(const NatTrans& f);

struct QuotientResult {
  Presheaf obj;
  NatTrans proj;
};
/** Quotient of F by a stage-wise equivalence relation R <= F x F given as a
 *  subpresheaf of product(F,F).obj; throws NotEquivalence with stage and
 *  witnessing pair. Class names come from the least member. */
QuotientResult quotient(const Presheaf& f, const Subpresheaf& r);

// Subobject lattice operations (AmbientMismatch across different presheaves).
Subpresheaf sub_meet(const Subpresheaf& a, const Subpresheaf& b);
Subpresheaf sub_join(const Subpresheaf& a, const Subpresheaf& b);
/** Largest subpresheaf disjoint from A: the Heyting complement in Sub(F). */
Subpresheaf sub_complement_within(const Subpresheaf& a);
/** Subpresheaf generated by one element: its restrictions at all q <= p. */
Subpresheaf sub_generated(const Presheaf& of, int stage, int elem);

/** Restriction of a subpresheaf to the down-set of p, as a power-fiber
 *  choice vector (masks zeroed outside the down-set). */
SubChoice subchoice_of(const Subpresheaf& s, int p);

}  // namespace toposlab
