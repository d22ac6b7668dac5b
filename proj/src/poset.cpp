#include "toposlab/poset.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace toposlab {

FinPoset FinPoset::validate(std::vector<std::string> elements,
                            const std::vector<std::pair<std::string, std::string>>& leq_pairs,
                            const Caps& caps) {
  const int n = static_cast<int>(elements.size());
  if (n < 1) throw InputError("poset needs at least one element");
  if (n > caps.max_poset_elements || n > 30)
    throw CapExceeded("poset has " + std::to_string(n) + " elements, cap is " +
                      std::to_string(std::min(caps.max_poset_elements, 30)));

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) {
    if (!index.emplace(elements[static_cast<size_t>(i)], i).second)
      throw DuplicateElement("duplicate poset element '" + elements[static_cast<size_t>(i)] + "'");
  }

  // leq[a][b] as bit b of row a; seed with reflexivity and the given pairs.
  std::vector<StageMask> above(static_cast<size_t>(n), 0);  // above[a] = { b : a <= b }
  for (int i = 0; i < n; ++i) above[static_cast<size_t>(i)] |= StageMask(1) << i;
  for (const auto& [lo, hi] : leq_pairs) {
    auto li = index.find(lo);
    auto hi_it = index.find(hi);
    if (li == index.end()) throw ForeignElement("unknown poset element '" + lo + "'");
    if (hi_it == index.end()) throw ForeignElement("unknown poset element '" + hi + "'");
    above[static_cast<size_t>(li->second)] |= StageMask(1) << hi_it->second;
  }

  // Transitive closure (Floyd-Warshall over mask rows).
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      if ((above[static_cast<size_t>(a)] >> k) & 1u) above[static_cast<size_t>(a)] |= above[static_cast<size_t>(k)];

  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (((above[static_cast<size_t>(a)] >> b) & 1u) && ((above[static_cast<size_t>(b)] >> a) & 1u))
        throw CycleError("antisymmetry violated: '" + elements[static_cast<size_t>(a)] + "' and '" +
                         elements[static_cast<size_t>(b)] + "' are mutually <=");

  auto data = std::make_shared<Data>();
  data->elements = std::move(elements);
  data->down.assign(static_cast<size_t>(n), 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if ((above[static_cast<size_t>(a)] >> b) & 1u) data->down[static_cast<size_t>(b)] |= StageMask(1) << a;

  // Linear extension: repeatedly pick the smallest-index element all of
  // whose strict predecessors are placed.
  std::vector<int>& order = data->ascending;
  StageMask placed = 0;
  while (static_cast<int>(order.size()) < n) {
    for (int i = 0; i < n; ++i) {
      if ((placed >> i) & 1u) continue;
      StageMask pred = data->down[static_cast<size_t>(i)] & ~(StageMask(1) << i);
      if ((pred & ~placed) == 0) {
        order.push_back(i);
        placed |= StageMask(1) << i;
        break;
      }
    }
  }
  return FinPoset(std::move(data));
}

int FinPoset::index_of(std::string_view name) const {
  if (auto i = try_index_of(name)) return *i;
  throw ForeignElement("unknown poset element '" + std::string(name) + "'");
}

std::optional<int> FinPoset::try_index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (d_->elements[static_cast<size_t>(i)] == name) return i;
  return std::nullopt;
}

bool FinPoset::same(const FinPoset& other) const {
  if (d_ == other.d_) return true;
  return d_->elements == other.d_->elements && d_->down == other.d_->down;
}

bool DownSet::operator==(const DownSet& other) const {
  return poset.same(other.poset) && bits == other.bits;
}

std::string DownSet::to_string() const {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (int i = 0; i < poset.size(); ++i) {
    if (!contains(i)) continue;
    if (!first) out << ',';
    out << poset.element(i);
    first = false;
  }
  out << '}';
  return out.str();
}

DownSet down_closure(const FinPoset& p, StageMask subset) {
  if (subset & ~p.full_mask()) throw ForeignElement("subset mentions a stage outside the poset");
  StageMask bits = 0;
  for (int i = 0; i < p.size(); ++i)
    if ((subset >> i) & 1u) bits |= p.down_mask(i);
  return DownSet{p, bits};
}

DownSet down_closure(const FinPoset& p, const std::vector<std::string>& subset) {
  StageMask m = 0;
  for (const auto& name : subset) m |= StageMask(1) << p.index_of(name);
  return down_closure(p, m);
}

namespace {

bool is_down_closed(const FinPoset& p, StageMask bits) {
  for (int i = 0; i < p.size(); ++i)
    if ((bits >> i) & 1u)
      if ((p.down_mask(i) & ~bits) != 0) return false;
  return true;
}

void check_same_poset(const DownSet& u, const DownSet& v) {
  if (!u.poset.same(v.poset)) throw PosetMismatch("down-sets belong to different posets");
}

}  // namespace

std::vector<DownSet> all_downsets(const FinPoset& p, const Caps& caps) {
  std::vector<DownSet> out;
  const StageMask full = p.full_mask();
  for (StageMask m = 0;; ++m) {
    if (is_down_closed(p, m)) {
      if (static_cast<long>(out.size()) >= caps.max_downsets)
        throw CapExceeded("down-set enumeration exceeds cap " + std::to_string(caps.max_downsets));
      out.push_back(DownSet{p, m});
    }
    if (m == full) break;
  }
  return out;
}

DownSet heyting_meet(const DownSet& u, const DownSet& v) {
  check_same_poset(u, v);
  return DownSet{u.poset, u.bits & v.bits};
}

DownSet heyting_join(const DownSet& u, const DownSet& v) {
  check_same_poset(u, v);
  return DownSet{u.poset, u.bits | v.bits};
}

DownSet heyting_implies(const DownSet& u, const DownSet& v) {
  check_same_poset(u, v);
  const FinPoset& p = u.poset;
  StageMask bits = 0;
  for (int i = 0; i < p.size(); ++i) {
    StageMask below = p.down_mask(i);
    if ((below & u.bits & ~v.bits) == 0) bits |= StageMask(1) << i;
  }
  return DownSet{p, bits};
}

DownSet heyting_neg(const DownSet& u) { return heyting_implies(u, heyting_bottom(u.poset)); }

DownSet heyting_top(const FinPoset& p) { return DownSet{p, p.full_mask()}; }

DownSet heyting_bottom(const FinPoset& p) { return DownSet{p, 0}; }

DownSet heyting(const FinPoset& p, HeytingOp op, const std::optional<DownSet>& u,
                const std::optional<DownSet>& v) {
  auto need = [&](const std::optional<DownSet>& x, const char* which) -> const DownSet& {
    if (!x) throw InputError(std::string("heyting op is missing operand ") + which);
    if (!x->poset.same(p)) throw PosetMismatch("operand belongs to a different poset");
    return *x;
  };
  auto forbid = [&](const std::optional<DownSet>& x, const char* which) {
    if (x) throw InputError(std::string("heyting op does not take operand ") + which);
  };
  switch (op) {
    case HeytingOp::Meet:
      return heyting_meet(need(u, "U"), need(v, "V"));
    case HeytingOp::Join:
      return heyting_join(need(u, "U"), need(v, "V"));
    case HeytingOp::Implies:
      return heyting_implies(need(u, "U"), need(v, "V"));
    case HeytingOp::Neg:
      forbid(v, "V");
      return heyting_neg(need(u, "U"));
    case HeytingOp::Top:
      forbid(u, "U");
      forbid(v, "V");
      return heyting_top(p);
    case HeytingOp::Bottom:
      forbid(u, "U");
      forbid(v, "V");
      return heyting_bottom(p);
  }
  throw InputError("unknown heyting op");
}

bool is_boolean(const FinPoset& p) {
  for (const DownSet& u : all_downsets(p))
    if (!heyting_join(u, heyting_neg(u)).is_top()) return false;
  return true;
}

}  // namespace toposlab
