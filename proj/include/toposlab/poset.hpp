#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toposlab/caps.hpp"
#include "toposlab/errors.hpp"

namespace toposlab {

using StageMask = std::uint32_t;

/** A finite poset of stages. Immutable after construction; the order
 *  relation is kept as a dense matrix of down-set masks, so leq queries
 *  are O(1) bit tests. */
class FinPoset {
 public:
  FinPoset() = default;

  /** Builds the poset whose order is the reflexive-transitive closure of
   *  `leq_pairs` (each pair (a,b) meaning a <= b). Throws CycleError if the
   *  closure makes two distinct elements mutually comparable,
   *  DuplicateElement / ForeignElement / CapExceeded on bad input. */
  static FinPoset validate(std::vector<std::string> elements,
                           const std::vector<std::pair<std::string, std::string>>& leq_pairs,
                           const Caps& caps = {});

  bool valid() const { return d_ != nullptr; }
  int size() const { return static_cast<int>(d_->elements.size()); }
  const std::vector<std::string>& elements() const { return d_->elements; }
  const std::string& element(int i) const { return d_->elements[static_cast<size_t>(i)]; }

  /** Index of a named element; throws ForeignElement if absent. */
  int index_of(std::string_view name) const;
  std::optional<int> try_index_of(std::string_view name) const;

  bool leq(int a, int b) const { return (d_->down[static_cast<size_t>(b)] >> a) & 1u; }
  /** Mask of { q : q <= p } (includes p). */
  StageMask down_mask(int p) const { return d_->down[static_cast<size_t>(p)]; }
  StageMask full_mask() const { return size() == 32 ? ~StageMask(0) : ((StageMask(1) << size()) - 1); }

  /** Stage indices in a linear extension (q <= p implies q comes first). */
  const std::vector<int>& ascending() const { return d_->ascending; }

  /** Identity: same underlying object or structurally equal. */
  bool same(const FinPoset& other) const;

  bool operator==(const FinPoset& other) const { return same(other); }

 private:
  struct Data {
    std::vector<std::string> elements;
    std::vector<StageMask> down;  // down[p] = mask of stages <= p
    std::vector<int> ascending;
  };
  std::shared_ptr<const Data> d_;
  explicit FinPoset(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
};

/** A down-closed set of stages: a truth value of the internal logic. */
struct DownSet {
  FinPoset poset;
  StageMask bits = 0;

  bool contains(int p) const { return (bits >> p) & 1u; }
  bool is_top() const { return bits == poset.full_mask(); }
  bool is_bottom() const { return bits == 0; }
  bool operator==(const DownSet& other) const;
  /** Members rendered like "{a,b}" in element order. */
  std::string to_string() const;
};

/** Smallest down-closed superset of `subset`. */
DownSet down_closure(const FinPoset& p, StageMask subset);
DownSet down_closure(const FinPoset& p, const std::vector<std::string>& subset);

/** Every down-set, in ascending bitmask order. */
std::vector<DownSet> all_downsets(const FinPoset& p, const Caps& caps = {});

enum class HeytingOp { Meet, Join, Implies, Neg, Top, Bottom };

DownSet heyting_meet(const DownSet& u, const DownSet& v);
DownSet heyting_join(const DownSet& u, const DownSet& v);
/** implies(U,V) = { p : forall q <= p, q in U implies q in V }. */
DownSet heyting_implies(const DownSet& u, const DownSet& v);
DownSet heyting_neg(const DownSet& u);
DownSet heyting_top(const FinPoset& p);
DownSet heyting_bottom(const FinPoset& p);

/** Dispatcher form; `v` must be present exactly for the binary ops and `u`
 *  for the unary one. Throws PosetMismatch across posets. */
DownSet heyting(const FinPoset& p, HeytingOp op, const std::optional<DownSet>& u,
                const std::optional<DownSet>& v);

/** True iff join(U, neg U) = top for every down-set; equivalently the poset
 *  is an antichain. */
bool is_boolean(const FinPoset& p);

}  // namespace toposlab
