#include "toposlab/presheaf.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace toposlab {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::ostringstream out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out << sep;
    out << parts[i];
  }
  return out.str();
}

/** Stages of the down-set of p, in ascending linear-extension order. */
std::vector<int> down_stages(const FinPoset& poset, int p) {
  std::vector<int> out;
  for (int q : poset.ascending())
    if (poset.leq(q, p)) out.push_back(q);
  return out;
}

std::string render_mask(const Presheaf& f, int q, FiberMask mask) {
  std::vector<std::string> names;
  for (int x = 0; x < f.fiber_size(q); ++x)
    if ((mask >> x) & 1u) names.push_back(f.elem_name(q, x));
  return "{" + join(names, ",") + "}";
}

std::string render_subchoice(const Presheaf& f, const std::vector<int>& stages,
                             const SubChoice& sc) {
  std::vector<std::string> parts;
  for (int q : stages)
    parts.push_back(f.poset().element(q) + ":" + render_mask(f, q, sc[static_cast<size_t>(q)]));
  return join(parts, ";");
}

std::string render_family(const Presheaf& from, const Presheaf& to, const std::vector<int>& stages,
                          const FamilyTables& fam) {
  std::vector<std::string> parts;
  for (int q : stages) {
    std::vector<std::string> arrows;
    for (int x = 0; x < from.fiber_size(q); ++x)
      arrows.push_back(from.elem_name(q, x) + "->" +
                       to.elem_name(q, fam[static_cast<size_t>(q)][static_cast<size_t>(x)]));
    parts.push_back(from.poset().element(q) + ":[" + join(arrows, ",") + "]");
  }
  return join(parts, ";");
}

std::shared_ptr<const Presheaf::Data> make_data(
    FinPoset poset, std::vector<std::vector<std::string>> fibers,
    std::vector<std::vector<std::vector<int>>> rest,
    std::variant<std::monostate, PairProv, PowerProvData, ExpProvData> prov = {}) {
  auto d = std::make_shared<Presheaf::Data>();
  d->poset = std::move(poset);
  d->fibers = std::move(fibers);
  d->rest = std::move(rest);
  d->prov = std::move(prov);
  return d;
}

std::vector<std::vector<std::vector<int>>> empty_rest(const FinPoset& poset) {
  size_t n = static_cast<size_t>(poset.size());
  return std::vector<std::vector<std::vector<int>>>(n, std::vector<std::vector<int>>(n));
}

void check_same_poset(const FinPoset& a, const FinPoset& b, const char* what) {
  if (!a.same(b))
    throw PosetMismatch(std::string(what) + " requires presheaves on the same poset");
}

}  // namespace

int Presheaf::elem_index(int p, const std::string& name) const {
  const auto& f = d_->fibers[static_cast<size_t>(p)];
  for (size_t i = 0; i < f.size(); ++i)
    if (f[i] == name) return static_cast<int>(i);
  throw ForeignElement("no element '" + name + "' in fiber at stage '" + d_->poset.element(p) +
                       "'");
}

const Presheaf* Presheaf::product_left() const {
  auto* pp = std::get_if<PairProv>(&d_->prov);
  return (pp && !pp->is_coproduct) ? &pp->left : nullptr;
}
const Presheaf* Presheaf::product_right() const {
  auto* pp = std::get_if<PairProv>(&d_->prov);
  return (pp && !pp->is_coproduct) ? &pp->right : nullptr;
}
const Presheaf* Presheaf::coproduct_left() const {
  auto* pp = std::get_if<PairProv>(&d_->prov);
  return (pp && pp->is_coproduct) ? &pp->left : nullptr;
}
const Presheaf* Presheaf::coproduct_right() const {
  auto* pp = std::get_if<PairProv>(&d_->prov);
  return (pp && pp->is_coproduct) ? &pp->right : nullptr;
}
const PowerProvData* Presheaf::power_prov() const { return std::get_if<PowerProvData>(&d_->prov); }
const ExpProvData* Presheaf::exp_prov() const { return std::get_if<ExpProvData>(&d_->prov); }

int PowerProvData::index_of(int p, const SubChoice& sc) const {
  const auto& row = choices[static_cast<size_t>(p)];
  auto it = std::lower_bound(row.begin(), row.end(), sc);
  if (it == row.end() || *it != sc) return -1;
  return static_cast<int>(it - row.begin());
}

int ExpProvData::index_of(int p, const FamilyTables& fam) const {
  const auto& row = families[static_cast<size_t>(p)];
  auto it = std::lower_bound(row.begin(), row.end(), fam);
  if (it == row.end() || *it != fam) return -1;
  return static_cast<int>(it - row.begin());
}

Presheaf Presheaf::validate(const FinPoset& poset, std::vector<std::vector<std::string>> fibers,
                            const std::map<std::pair<int, int>, std::vector<int>>& tables,
                            const Caps& caps) {
  int n = poset.size();
  if (static_cast<int>(fibers.size()) != n)
    throw InputError("expected one fiber per poset element");
  for (int p = 0; p < n; ++p) {
    const auto& f = fibers[static_cast<size_t>(p)];
    if (static_cast<int>(f.size()) > caps.max_fiber)
      throw FiberCapExceeded("fiber at stage '" + poset.element(p) + "' has " +
                             std::to_string(f.size()) + " elements (cap " +
                             std::to_string(caps.max_fiber) + ")");
    for (size_t i = 0; i < f.size(); ++i)
      for (size_t j = i + 1; j < f.size(); ++j)
        if (f[i] == f[j])
          throw DuplicateElement("duplicate element '" + f[i] + "' in fiber at stage '" +
                                 poset.element(p) + "'");
  }

  for (const auto& [key, table] : tables) {
    auto [p, q] = key;
    if (p < 0 || p >= n || q < 0 || q >= n)
      throw InputError("restriction table references a stage outside the poset");
    if (p == q || !poset.leq(q, p))
      throw InputError("restriction table for '" + poset.element(p) + "' -> '" +
                       poset.element(q) + "' does not follow the order");
    if (table.size() != fibers[static_cast<size_t>(p)].size())
      throw InputError("restriction table '" + poset.element(p) + "' -> '" + poset.element(q) +
                       "' has wrong size");
    for (int v : table)
      if (v < 0 || v >= static_cast<int>(fibers[static_cast<size_t>(q)].size()))
        throw InputError("restriction table '" + poset.element(p) + "' -> '" + poset.element(q) +
                         "' maps outside the target fiber");
  }

  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto it = tables.find({p, q});
      if (it != tables.end()) {
        rest[static_cast<size_t>(p)][static_cast<size_t>(q)] = it->second;
        continue;
      }
      // Missing table: identity by element names when that makes sense.
      std::vector<int> table;
      table.reserve(fibers[static_cast<size_t>(p)].size());
      for (const auto& name : fibers[static_cast<size_t>(p)]) {
        const auto& tf = fibers[static_cast<size_t>(q)];
        auto pos = std::find(tf.begin(), tf.end(), name);
        if (pos == tf.end())
          throw MissingTable("no restriction table '" + poset.element(p) + "' -> '" +
                             poset.element(q) + "' and element '" + name +
                             "' has no same-named image");
        table.push_back(static_cast<int>(pos - tf.begin()));
      }
      rest[static_cast<size_t>(p)][static_cast<size_t>(q)] = std::move(table);
    }
  }

  // Composition check: restricting in one hop agrees with two.
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      for (int r = 0; r < n; ++r) {
        if (r == q || r == p || !poset.leq(r, q)) continue;
        const auto& pq = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
        const auto& qr = rest[static_cast<size_t>(q)][static_cast<size_t>(r)];
        const auto& pr = rest[static_cast<size_t>(p)][static_cast<size_t>(r)];
        for (size_t x = 0; x < pq.size(); ++x)
          if (qr[static_cast<size_t>(pq[x])] != pr[x])
            throw FunctorialityError(
                "restrictions disagree on element '" + fibers[static_cast<size_t>(p)][x] +
                "' along '" + poset.element(p) + "' -> '" + poset.element(q) + "' -> '" +
                poset.element(r) + "'");
      }
    }

  return Presheaf(make_data(poset, std::move(fibers), std::move(rest)));
}

NatTrans NatTrans::validate(Presheaf source, Presheaf target, std::vector<std::vector<int>> comp) {
  check_same_poset(source.poset(), target.poset(), "a transformation");
  const FinPoset& poset = source.poset();
  int n = poset.size();
  if (static_cast<int>(comp.size()) != n)
    throw InputError("expected one component per poset element");
  for (int p = 0; p < n; ++p) {
    if (static_cast<int>(comp[static_cast<size_t>(p)].size()) != source.fiber_size(p))
      throw InputError("component at stage '" + poset.element(p) + "' has wrong size");
    for (int v : comp[static_cast<size_t>(p)])
      if (v < 0 || v >= target.fiber_size(p))
        throw InputError("component at stage '" + poset.element(p) +
                         "' maps outside the target fiber");
  }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      for (int x = 0; x < source.fiber_size(p); ++x) {
        int via_target = target.restrict_elem(p, q, comp[static_cast<size_t>(p)][static_cast<size_t>(x)]);
        int via_source = comp[static_cast<size_t>(q)][static_cast<size_t>(source.restrict_elem(p, q, x))];
        if (via_target != via_source)
          throw FunctorialityError("transformation is not natural on element '" +
                                   source.elem_name(p, x) + "' along '" + poset.element(p) +
                                   "' -> '" + poset.element(q) + "'");
      }
    }
  NatTrans nt;
  nt.source = std::move(source);
  nt.target = std::move(target);
  nt.comp = std::move(comp);
  return nt;
}

Subpresheaf Subpresheaf::validate(Presheaf of, std::vector<FiberMask> chosen) {
  const FinPoset& poset = of.poset();
  int n = poset.size();
  if (static_cast<int>(chosen.size()) != n)
    throw InputError("expected one chosen set per poset element");
  for (int p = 0; p < n; ++p) {
    FiberMask all = of.fiber_size(p) >= 64 ? ~FiberMask{0}
                                           : ((FiberMask{1} << of.fiber_size(p)) - 1);
    if (chosen[static_cast<size_t>(p)] & ~all)
      throw InputError("chosen set at stage '" + poset.element(p) + "' mentions missing elements");
  }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      for (int x = 0; x < of.fiber_size(p); ++x)
        if (((chosen[static_cast<size_t>(p)] >> x) & 1u) &&
            !((chosen[static_cast<size_t>(q)] >> of.restrict_elem(p, q, x)) & 1u))
          throw InputError("chosen sets are not closed under restriction: element '" +
                           of.elem_name(p, x) + "' at stage '" + poset.element(p) +
                           "' leaves the selection at '" + poset.element(q) + "'");
    }
  Subpresheaf s;
  s.of = std::move(of);
  s.chosen = std::move(chosen);
  return s;
}

Subpresheaf Subpresheaf::empty(const Presheaf& of) {
  Subpresheaf s;
  s.of = of;
  s.chosen.assign(static_cast<size_t>(of.poset().size()), 0);
  return s;
}

Subpresheaf Subpresheaf::full(const Presheaf& of) {
  Subpresheaf s;
  s.of = of;
  s.chosen.resize(static_cast<size_t>(of.poset().size()));
  for (int p = 0; p < of.poset().size(); ++p)
    s.chosen[static_cast<size_t>(p)] =
        of.fiber_size(p) >= 64 ? ~FiberMask{0} : ((FiberMask{1} << of.fiber_size(p)) - 1);
  return s;
}

Presheaf terminal_presheaf(const FinPoset& p) {
  int n = p.size();
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n), {"*"});
  auto rest = empty_rest(p);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && p.leq(b, a)) rest[static_cast<size_t>(a)][static_cast<size_t>(b)] = {0};
  return Presheaf(make_data(p, std::move(fibers), std::move(rest)));
}

Presheaf initial_presheaf(const FinPoset& p) {
  int n = p.size();
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  return Presheaf(make_data(p, std::move(fibers), empty_rest(p)));
}

int pair_index(const Presheaf& prod, int p, int left, int right) {
  const Presheaf* r = prod.product_right();
  if (!r) throw InternalError("pair_index on a presheaf that is not a product");
  return left * r->fiber_size(p) + right;
}

std::pair<int, int> pair_split(const Presheaf& prod, int p, int idx) {
  const Presheaf* r = prod.product_right();
  if (!r) throw InternalError("pair_split on a presheaf that is not a product");
  int rb = r->fiber_size(p);
  return {idx / rb, idx % rb};
}

ProductResult product(const Presheaf& a, const Presheaf& b) {
  check_same_poset(a.poset(), b.poset(), "a product");
  const FinPoset& poset = a.poset();
  int n = poset.size();
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < a.fiber_size(p); ++i)
      for (int j = 0; j < b.fiber_size(p); ++j)
        fibers[static_cast<size_t>(p)].push_back("(" + a.elem_name(p, i) + "," + b.elem_name(p, j) +
                                                 ")");
  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto& table = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
      for (int i = 0; i < a.fiber_size(p); ++i)
        for (int j = 0; j < b.fiber_size(p); ++j)
          table.push_back(a.restrict_elem(p, q, i) * b.fiber_size(q) + b.restrict_elem(p, q, j));
    }
  PairProv prov{a, b, false};
  Presheaf obj(make_data(poset, std::move(fibers), std::move(rest), std::move(prov)));

  std::vector<std::vector<int>> lcomp(static_cast<size_t>(n)), rcomp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < a.fiber_size(p); ++i)
      for (int j = 0; j < b.fiber_size(p); ++j) {
        lcomp[static_cast<size_t>(p)].push_back(i);
        rcomp[static_cast<size_t>(p)].push_back(j);
      }
  ProductResult res;
  res.obj = obj;
  res.proj_left = NatTrans{obj, a, std::move(lcomp)};
  res.proj_right = NatTrans{obj, b, std::move(rcomp)};
  return res;
}

std::pair<int, int> coproduct_split(const Presheaf& sum, int p, int idx) {
  const Presheaf* l = sum.coproduct_left();
  if (!l) throw InternalError("coproduct_split on a presheaf that is not a coproduct");
  int la = l->fiber_size(p);
  return idx < la ? std::pair<int, int>{0, idx} : std::pair<int, int>{1, idx - la};
}

int inl_index(const Presheaf& sum, int p, int left) {
  if (!sum.coproduct_left()) throw InternalError("inl_index on a presheaf that is not a coproduct");
  (void)p;
  return left;
}

int inr_index(const Presheaf& sum, int p, int right) {
  const Presheaf* l = sum.coproduct_left();
  if (!l) throw InternalError("inr_index on a presheaf that is not a coproduct");
  return l->fiber_size(p) + right;
}

CoproductResult coproduct(const Presheaf& a, const Presheaf& b) {
  check_same_poset(a.poset(), b.poset(), "a coproduct");
  const FinPoset& poset = a.poset();
  int n = poset.size();
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < a.fiber_size(p); ++i)
      fibers[static_cast<size_t>(p)].push_back("inl(" + a.elem_name(p, i) + ")");
    for (int j = 0; j < b.fiber_size(p); ++j)
      fibers[static_cast<size_t>(p)].push_back("inr(" + b.elem_name(p, j) + ")");
  }
  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto& table = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
      for (int i = 0; i < a.fiber_size(p); ++i) table.push_back(a.restrict_elem(p, q, i));
      for (int j = 0; j < b.fiber_size(p); ++j)
        table.push_back(a.fiber_size(q) + b.restrict_elem(p, q, j));
    }
  PairProv prov{a, b, true};
  Presheaf obj(make_data(poset, std::move(fibers), std::move(rest), std::move(prov)));

  std::vector<std::vector<int>> lcomp(static_cast<size_t>(n)), rcomp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < a.fiber_size(p); ++i) lcomp[static_cast<size_t>(p)].push_back(i);
    for (int j = 0; j < b.fiber_size(p); ++j)
      rcomp[static_cast<size_t>(p)].push_back(a.fiber_size(p) + j);
  }
  CoproductResult res;
  res.obj = obj;
  res.inj_left = NatTrans{a, obj, std::move(lcomp)};
  res.inj_right = NatTrans{b, obj, std::move(rcomp)};
  return res;
}

ConstructResult construct(ConstructKind kind, const FinPoset& poset,
                          const std::vector<Presheaf>& args) {
  ConstructResult res;
  switch (kind) {
    case ConstructKind::Terminal:
      if (!args.empty()) throw ArityError("the terminal presheaf takes no arguments");
      res.obj = terminal_presheaf(poset);
      return res;
    case ConstructKind::Initial:
      if (!args.empty()) throw ArityError("the initial presheaf takes no arguments");
      res.obj = initial_presheaf(poset);
      return res;
    case ConstructKind::Product: {
      if (args.size() != 2) throw ArityError("a product takes exactly two arguments");
      check_same_poset(args[0].poset(), poset, "construct");
      auto pr = product(args[0], args[1]);
      res.obj = pr.obj;
      res.maps = {pr.proj_left, pr.proj_right};
      return res;
    }
    case ConstructKind::Coproduct: {
      if (args.size() != 2) throw ArityError("a coproduct takes exactly two arguments");
      check_same_poset(args[0].poset(), poset, "construct");
      auto co = coproduct(args[0], args[1]);
      res.obj = co.obj;
      res.maps = {co.inj_left, co.inj_right};
      return res;
    }
  }
  throw InternalError("unreachable construct kind");
}

Presheaf power_object(const Presheaf& f, const Caps& caps) {
  const FinPoset& poset = f.poset();
  int n = poset.size();
  for (int p = 0; p < n; ++p)
    if (f.fiber_size(p) > 62)
      throw CapExceeded("power object argument has a fiber of " +
                        std::to_string(f.fiber_size(p)) + " elements; at most 62 is supported");

  PowerProvData prov;
  prov.arg = f;
  prov.choices.resize(static_cast<size_t>(n));

  for (int p = 0; p < n; ++p) {
    std::vector<int> stages = down_stages(poset, p);
    auto& out = prov.choices[static_cast<size_t>(p)];
    SubChoice current(static_cast<size_t>(n), 0);
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == stages.size()) {
        out.push_back(current);
        if (static_cast<long>(out.size()) > caps.max_power_fiber)
          throw CapExceeded("power object fiber at stage '" + poset.element(p) + "' exceeds " +
                            std::to_string(caps.max_power_fiber) + " elements");
        return;
      }
      int q = stages[i];
      // Only elements whose restrictions land in the masks already chosen
      // below can appear; enumerating subsets of that pool keeps the work
      // proportional to the fiber size rather than 2^|fiber|.
      FiberMask allowed = 0;
      for (int x = 0; x < f.fiber_size(q); ++x) {
        bool ok = true;
        for (size_t j = 0; j < i && ok; ++j) {
          int r = stages[j];
          if (!poset.leq(r, q)) continue;
          if (!((current[static_cast<size_t>(r)] >> f.restrict_elem(q, r, x)) & 1u)) ok = false;
        }
        if (ok) allowed |= FiberMask{1} << x;
      }
      FiberMask mask = allowed;
      while (true) {
        current[static_cast<size_t>(q)] = mask;
        rec(i + 1);
        current[static_cast<size_t>(q)] = 0;
        if (mask == 0) break;
        mask = (mask - 1) & allowed;
      }
    };
    rec(0);
    std::sort(out.begin(), out.end());
  }

  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    std::vector<int> stages = down_stages(poset, p);
    for (const auto& sc : prov.choices[static_cast<size_t>(p)])
      fibers[static_cast<size_t>(p)].push_back(render_subchoice(f, stages, sc));
  }

  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto& table = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
      for (const auto& sc : prov.choices[static_cast<size_t>(p)]) {
        SubChoice cut(static_cast<size_t>(n), 0);
        for (int r = 0; r < n; ++r)
          if (poset.leq(r, q)) cut[static_cast<size_t>(r)] = sc[static_cast<size_t>(r)];
        int idx = prov.index_of(q, cut);
        if (idx < 0) throw InternalError("power object restriction left the fiber");
        table.push_back(idx);
      }
    }

  return Presheaf(make_data(poset, std::move(fibers), std::move(rest), std::move(prov)));
}

namespace {

/** Enumerates families of per-stage tables over `stages` subject to the
 *  commuting condition, in odometer order (earlier stages and earlier
 *  arguments most significant). */
void enumerate_families(const Presheaf& f, const Presheaf& g, const std::vector<int>& stages,
                        long cap, const char* what, std::vector<FamilyTables>& out) {
  const FinPoset& poset = f.poset();
  int n = poset.size();
  FamilyTables current(static_cast<size_t>(n));
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == stages.size()) {
      out.push_back(current);
      if (static_cast<long>(out.size()) > cap)
        throw CapExceeded(std::string(what) + " exceeds " + std::to_string(cap) + " elements");
      return;
    }
    int q = stages[i];
    int fs = f.fiber_size(q), gs = g.fiber_size(q);
    if (fs > 0 && gs == 0) return;  // no map into an empty fiber
    std::vector<int> table(static_cast<size_t>(fs), 0);
    while (true) {
      bool ok = true;
      for (size_t j = 0; j < i && ok; ++j) {
        int r = stages[j];
        if (!poset.leq(r, q)) continue;
        for (int x = 0; x < fs && ok; ++x)
          if (current[static_cast<size_t>(r)][static_cast<size_t>(f.restrict_elem(q, r, x))] !=
              g.restrict_elem(q, r, table[static_cast<size_t>(x)]))
            ok = false;
      }
      if (ok) {
        current[static_cast<size_t>(q)] = table;
        rec(i + 1);
        current[static_cast<size_t>(q)].clear();
      }
      // advance odometer (last slot least significant)
      int k = fs - 1;
      while (k >= 0 && table[static_cast<size_t>(k)] == gs - 1) {
        table[static_cast<size_t>(k)] = 0;
        --k;
      }
      if (k < 0) break;
      ++table[static_cast<size_t>(k)];
    }
  };
  rec(0);
}

}  // namespace

Presheaf exponential(const Presheaf& f, const Presheaf& g, const Caps& caps) {
  check_same_poset(f.poset(), g.poset(), "an exponential");
  const FinPoset& poset = f.poset();
  int n = poset.size();

  ExpProvData prov;
  prov.from = f;
  prov.to = g;
  prov.families.resize(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    std::vector<int> stages = down_stages(poset, p);
    enumerate_families(f, g, stages, caps.max_power_fiber,
                       ("exponential fiber at stage '" + poset.element(p) + "'").c_str(),
                       prov.families[static_cast<size_t>(p)]);
    std::sort(prov.families[static_cast<size_t>(p)].begin(),
              prov.families[static_cast<size_t>(p)].end());
  }

  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    std::vector<int> stages = down_stages(poset, p);
    for (const auto& fam : prov.families[static_cast<size_t>(p)])
      fibers[static_cast<size_t>(p)].push_back(render_family(f, g, stages, fam));
  }

  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto& table = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
      for (const auto& fam : prov.families[static_cast<size_t>(p)]) {
        FamilyTables cut(static_cast<size_t>(n));
        for (int r = 0; r < n; ++r)
          if (poset.leq(r, q)) cut[static_cast<size_t>(r)] = fam[static_cast<size_t>(r)];
        int idx = prov.index_of(q, cut);
        if (idx < 0) throw InternalError("exponential restriction left the fiber");
        table.push_back(idx);
      }
    }

  return Presheaf(make_data(poset, std::move(fibers), std::move(rest), std::move(prov)));
}

std::vector<NatTrans> enumerate_nat_trans(const Presheaf& f, const Presheaf& g, const Caps& caps) {
  check_same_poset(f.poset(), g.poset(), "a transformation");
  std::vector<int> stages = f.poset().ascending();
  std::vector<FamilyTables> fams;
  enumerate_families(f, g, stages, caps.max_hom, "the set of transformations", fams);
  std::sort(fams.begin(), fams.end());
  std::vector<NatTrans> out;
  out.reserve(fams.size());
  for (auto& fam : fams) out.push_back(NatTrans{f, g, std::move(fam)});
  return out;
}

std::vector<std::vector<int>> global_sections(const Presheaf& f, const Caps& caps) {
  const FinPoset& poset = f.poset();
  int n = poset.size();
  std::vector<int> stages = poset.ascending();
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<size_t>(n), -1);
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == stages.size()) {
      out.push_back(current);
      if (static_cast<long>(out.size()) > caps.max_hom)
        throw CapExceeded("the set of global sections exceeds " + std::to_string(caps.max_hom) +
                          " elements");
      return;
    }
    int q = stages[i];
    for (int x = 0; x < f.fiber_size(q); ++x) {
      bool ok = true;
      for (size_t j = 0; j < i && ok; ++j) {
        int r = stages[j];
        if (poset.leq(r, q) && f.restrict_elem(q, r, x) != current[static_cast<size_t>(r)])
          ok = false;
      }
      if (!ok) continue;
      current[static_cast<size_t>(q)] = x;
      rec(i + 1);
      current[static_cast<size_t>(q)] = -1;
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

Subpresheaf image(const NatTrans& nt) {
  const FinPoset& poset = nt.target.poset();
  Subpresheaf s = Subpresheaf::empty(nt.target);
  for (int p = 0; p < poset.size(); ++p)
    for (int x = 0; x < nt.source.fiber_size(p); ++x)
      s.chosen[static_cast<size_t>(p)] |= FiberMask{1} << nt.at(p, x);
  return s;
}

QuotientResult quotient(const Presheaf& f, const Subpresheaf& r) {
  const Presheaf* left = r.of.product_left();
  const Presheaf* right = r.of.product_right();
  if (!left || !right || !left->same(f) || !right->same(f))
    throw AmbientMismatch("the relation must live on the product of the presheaf with itself");
  const FinPoset& poset = f.poset();
  int n = poset.size();

  auto related = [&](int p, int x, int y) {
    return r.contains(p, pair_index(r.of, p, x, y));
  };

  // class_of[p][x] = index of the least member of x's class
  std::vector<std::vector<int>> class_of(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    int fs = f.fiber_size(p);
    for (int x = 0; x < fs; ++x)
      if (!related(p, x, x))
        throw NotEquivalence("relation is not reflexive at stage '" + poset.element(p) +
                             "' on element '" + f.elem_name(p, x) + "'");
    for (int x = 0; x < fs; ++x)
      for (int y = 0; y < fs; ++y) {
        if (related(p, x, y) && !related(p, y, x))
          throw NotEquivalence("relation is not symmetric at stage '" + poset.element(p) +
                               "' on ('" + f.elem_name(p, x) + "','" + f.elem_name(p, y) + "')");
        for (int z = 0; z < fs; ++z)
          if (related(p, x, y) && related(p, y, z) && !related(p, x, z))
            throw NotEquivalence("relation is not transitive at stage '" + poset.element(p) +
                                 "' through '" + f.elem_name(p, y) + "'");
      }
    auto& row = class_of[static_cast<size_t>(p)];
    row.assign(static_cast<size_t>(fs), -1);
    for (int x = 0; x < fs; ++x)
      for (int y = 0; y <= x; ++y)
        if (related(p, x, y)) {
          row[static_cast<size_t>(x)] = y;
          break;
        }
  }

  // Quotient fibers: one element per least representative, kept in order.
  std::vector<std::vector<int>> reps(static_cast<size_t>(n));
  std::vector<std::vector<int>> rep_pos(static_cast<size_t>(n));
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    rep_pos[static_cast<size_t>(p)].assign(static_cast<size_t>(f.fiber_size(p)), -1);
    for (int x = 0; x < f.fiber_size(p); ++x)
      if (class_of[static_cast<size_t>(p)][static_cast<size_t>(x)] == x) {
        rep_pos[static_cast<size_t>(p)][static_cast<size_t>(x)] =
            static_cast<int>(reps[static_cast<size_t>(p)].size());
        reps[static_cast<size_t>(p)].push_back(x);
        fibers[static_cast<size_t>(p)].push_back("[" + f.elem_name(p, x) + "]");
      }
  }

  auto rest = empty_rest(poset);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q || !poset.leq(q, p)) continue;
      auto& table = rest[static_cast<size_t>(p)][static_cast<size_t>(q)];
      for (int x : reps[static_cast<size_t>(p)]) {
        int fx = f.restrict_elem(p, q, x);
        table.push_back(rep_pos[static_cast<size_t>(q)][static_cast<size_t>(
            class_of[static_cast<size_t>(q)][static_cast<size_t>(fx)])]);
      }
      // Restriction must not depend on the representative.
      for (int x = 0; x < f.fiber_size(p); ++x) {
        int cx = class_of[static_cast<size_t>(p)][static_cast<size_t>(x)];
        int via_rep = class_of[static_cast<size_t>(q)][static_cast<size_t>(f.restrict_elem(p, q, cx))];
        int via_x = class_of[static_cast<size_t>(q)][static_cast<size_t>(f.restrict_elem(p, q, x))];
        if (via_rep != via_x)
          throw NotEquivalence("relation is not closed under restriction on element '" +
                               f.elem_name(p, x) + "' at stage '" + poset.element(p) + "'");
      }
    }

  QuotientResult res;
  res.obj = Presheaf(make_data(poset, std::move(fibers), std::move(rest)));
  std::vector<std::vector<int>> comp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    for (int x = 0; x < f.fiber_size(p); ++x)
      comp[static_cast<size_t>(p)].push_back(rep_pos[static_cast<size_t>(p)][static_cast<size_t>(
          class_of[static_cast<size_t>(p)][static_cast<size_t>(x)])]);
  res.proj = NatTrans{f, res.obj, std::move(comp)};
  return res;
}

namespace {
void check_same_ambient(const Subpresheaf& a, const Subpresheaf& b) {
  if (!a.of.same(b.of))
    throw AmbientMismatch("subpresheaf operation across different ambient presheaves");
}
}  // namespace

Subpresheaf sub_meet(const Subpresheaf& a, const Subpresheaf& b) {
  check_same_ambient(a, b);
  Subpresheaf s = a;
  for (size_t p = 0; p < s.chosen.size(); ++p) s.chosen[p] &= b.chosen[p];
  return s;
}

Subpresheaf sub_join(const Subpresheaf& a, const Subpresheaf& b) {
  check_same_ambient(a, b);
  Subpresheaf s = a;
  for (size_t p = 0; p < s.chosen.size(); ++p) s.chosen[p] |= b.chosen[p];
  return s;
}

Subpresheaf sub_complement_within(const Subpresheaf& a) {
  const Presheaf& f = a.of;
  const FinPoset& poset = f.poset();
  Subpresheaf s = Subpresheaf::empty(f);
  for (int p = 0; p < poset.size(); ++p)
    for (int x = 0; x < f.fiber_size(p); ++x) {
      bool avoid = true;
      for (int q = 0; q < poset.size() && avoid; ++q)
        if (poset.leq(q, p) && a.contains(q, f.restrict_elem(p, q, x))) avoid = false;
      if (avoid) s.chosen[static_cast<size_t>(p)] |= FiberMask{1} << x;
    }
  return s;
}

Subpresheaf sub_generated(const Presheaf& of, int stage, int elem) {
  if (stage < 0 || stage >= of.poset().size() || elem < 0 || elem >= of.fiber_size(stage))
    throw InputError("sub_generated: no such element");
  Subpresheaf s = Subpresheaf::empty(of);
  for (int q = 0; q < of.poset().size(); ++q)
    if (of.poset().leq(q, stage))
      s.chosen[static_cast<size_t>(q)] |= FiberMask{1} << of.restrict_elem(stage, q, elem);
  return s;
}

SubChoice subchoice_of(const Subpresheaf& s, int p) {
  const FinPoset& poset = s.of.poset();
  SubChoice sc(static_cast<size_t>(poset.size()), 0);
  for (int q = 0; q < poset.size(); ++q)
    if (poset.leq(q, p)) sc[static_cast<size_t>(q)] = s.chosen[static_cast<size_t>(q)];
  return sc;
}

}  // namespace toposlab
