#include "toposlab/finiteness.hpp"

#include <deque>

namespace toposlab {

namespace {

/** Worklist closure over (stage, power-fiber element) pairs. `step` pushes
 *  the consequences of a newly admitted member through `add`. */
class Closure {
 public:
  explicit Closure(const Presheaf& power) : power_(power), prov_(*power.power_prov()) {
    in_.resize(static_cast<size_t>(power.poset().size()));
    for (int p = 0; p < power.poset().size(); ++p)
      in_[static_cast<size_t>(p)].assign(static_cast<size_t>(power.fiber_size(p)), 0);
  }

  void add(int stage, int elem) {
    auto& cell = in_[static_cast<size_t>(stage)][static_cast<size_t>(elem)];
    if (cell) return;
    cell = 1;
    work_.push_back({stage, elem});
  }

  template <typename Step>
  void run(Step step) {
    while (!work_.empty()) {
      auto [stage, elem] = work_.front();
      work_.pop_front();
      // restriction-closure is common to both definitions
      for (int q = 0; q < power_.poset().size(); ++q)
        if (q != stage && power_.poset().leq(q, stage))
          add(q, power_.restrict_elem(stage, q, elem));
      step(*this, stage, elem);
    }
  }

  bool contains(int stage, int elem) const {
    return in_[static_cast<size_t>(stage)][static_cast<size_t>(elem)] != 0;
  }

  Subpresheaf to_subpresheaf() const {
    Subpresheaf s = Subpresheaf::empty(power_);
    for (int p = 0; p < power_.poset().size(); ++p)
      for (int x = 0; x < power_.fiber_size(p); ++x)
        if (contains(p, x)) s.chosen[static_cast<size_t>(p)] |= FiberMask{1} << x;
    return s;
  }

  const Presheaf& power() const { return power_; }
  const PowerProvData& prov() const { return prov_; }

 private:
  const Presheaf& power_;
  const PowerProvData& prov_;
  std::vector<std::vector<char>> in_;
  std::deque<std::pair<int, int>> work_;
};

int empty_index(const Closure& c, int stage) {
  SubChoice zero(static_cast<size_t>(c.power().poset().size()), 0);
  int idx = c.prov().index_of(stage, zero);
  if (idx < 0) throw InternalError("power object lacks the empty subobject");
  return idx;
}

/** Subchoice of the singleton generated by element a of A at `stage`. */
SubChoice generated_choice(const Presheaf& a, int stage, int elem) {
  SubChoice sc(static_cast<size_t>(a.poset().size()), 0);
  for (int q = 0; q < a.poset().size(); ++q)
    if (a.poset().leq(q, stage))
      sc[static_cast<size_t>(q)] = FiberMask{1} << a.restrict_elem(stage, q, elem);
  return sc;
}

SubChoice join_choice(const SubChoice& x, const SubChoice& y) {
  SubChoice out = x;
  for (size_t i = 0; i < out.size(); ++i) out[i] |= y[i];
  return out;
}

void check_mask_width(const Presheaf& power) {
  for (int p = 0; p < power.poset().size(); ++p)
    if (power.fiber_size(p) > 62)
      throw CapExceeded("finiteness family over a power fiber of " +
                        std::to_string(power.fiber_size(p)) + " elements; at most 62 supported");
}

KFamily finish(const Presheaf& power, const Closure& c) {
  KFamily k;
  k.of = power.power_prov()->arg;
  k.power = power;
  k.family = c.to_subpresheaf();
  return k;
}

}  // namespace

KFamily kfinite_by_adjoin_on(const Presheaf& power, const Caps&) {
  const PowerProvData* prov = power.power_prov();
  if (!prov) throw InternalError("kfinite_by_adjoin_on needs a power object");
  check_mask_width(power);
  const Presheaf& a = prov->arg;
  Closure c(power);
  for (int p = 0; p < power.poset().size(); ++p) c.add(p, empty_index(c, p));
  c.run([&](Closure& cl, int stage, int elem) {
    const SubChoice& cur = prov->choices[static_cast<size_t>(stage)][static_cast<size_t>(elem)];
    for (int x = 0; x < a.fiber_size(stage); ++x) {
      SubChoice next = join_choice(cur, generated_choice(a, stage, x));
      int idx = prov->index_of(stage, next);
      if (idx < 0) throw InternalError("adjoin left the power fiber");
      cl.add(stage, idx);
    }
  });
  return finish(power, c);
}

KFamily kfinite_by_union_on(const Presheaf& power, const Caps&) {
  const PowerProvData* prov = power.power_prov();
  if (!prov) throw InternalError("kfinite_by_union_on needs a power object");
  check_mask_width(power);
  const Presheaf& a = prov->arg;
  Closure c(power);
  for (int p = 0; p < power.poset().size(); ++p) {
    c.add(p, empty_index(c, p));
    for (int x = 0; x < a.fiber_size(p); ++x) {
      int idx = prov->index_of(p, generated_choice(a, p, x));
      if (idx < 0) throw InternalError("generated singleton outside the power fiber");
      c.add(p, idx);
    }
  }
  c.run([&](Closure& cl, int stage, int elem) {
    const SubChoice& cur = prov->choices[static_cast<size_t>(stage)][static_cast<size_t>(elem)];
    // join with every current member at the same stage
    for (int other = 0; other < power.fiber_size(stage); ++other) {
      if (!cl.contains(stage, other)) continue;
      const SubChoice& oc = prov->choices[static_cast<size_t>(stage)][static_cast<size_t>(other)];
      int idx = prov->index_of(stage, join_choice(cur, oc));
      if (idx < 0) throw InternalError("join left the power fiber");
      cl.add(stage, idx);
    }
  });
  return finish(power, c);
}

KFamily kfinite_by_adjoin(const Presheaf& a, const Caps& caps) {
  return kfinite_by_adjoin_on(power_object(a, caps), caps);
}

KFamily kfinite_by_union(const Presheaf& a, const Caps& caps) {
  return kfinite_by_union_on(power_object(a, caps), caps);
}

bool is_kfinite(const Presheaf& a, const Subpresheaf& s, int stage, const Caps& caps) {
  if (!s.of.same(a)) throw AmbientMismatch("the subobject does not live in the given presheaf");
  KFamily k = kfinite_by_adjoin(a, caps);
  int idx = k.power.power_prov()->index_of(stage, subchoice_of(s, stage));
  if (idx < 0) throw InternalError("subchoice missing from the power fiber");
  return k.member(stage, idx);
}

}  // namespace toposlab
