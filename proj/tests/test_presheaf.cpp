#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "toposlab/poset.hpp"
#include "toposlab/presheaf.hpp"

using namespace toposlab;

namespace {

FinPoset chain2() { return FinPoset::validate({"bot", "top"}, {{"bot", "top"}}); }

FinPoset fork_poset() {
  return FinPoset::validate({"a", "b", "top"}, {{"a", "top"}, {"b", "top"}});
}

// Constant two-element presheaf; restrictions default to identity by name.
Presheaf const2(const FinPoset& p) {
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(p.size()), {"x", "y"});
  return Presheaf::validate(p, std::move(fibers), {});
}

// The collapse presheaf on the 2-chain: {x,y} upstairs, both restricting to x.
Presheaf collapse(const FinPoset& p) {
  int bot = p.index_of("bot"), top = p.index_of("top");
  std::vector<std::vector<std::string>> fibers(2);
  fibers[static_cast<size_t>(bot)] = {"x"};
  fibers[static_cast<size_t>(top)] = {"x", "y"};
  return Presheaf::validate(p, std::move(fibers), {{{top, bot}, {0, 0}}});
}

// Subpresheaf count over the down-set of `at`, from scratch: enumerate all
// per-stage masks and keep the restriction-closed ones.
long count_subpresheaves(const Presheaf& f, int at) {
  const FinPoset& p = f.poset();
  std::vector<int> stages;
  for (int q = 0; q < p.size(); ++q)
    if (p.leq(q, at)) stages.push_back(q);
  std::vector<FiberMask> mask(static_cast<size_t>(p.size()), 0);
  auto closed = [&] {
    for (int hi : stages)
      for (int lo : stages) {
        if (hi == lo || !p.leq(lo, hi)) continue;
        for (int x = 0; x < f.fiber_size(hi); ++x)
          if (((mask[static_cast<size_t>(hi)] >> x) & 1u) &&
              !((mask[static_cast<size_t>(lo)] >> f.restrict_elem(hi, lo, x)) & 1u))
            return false;
      }
    return true;
  };
  long count = 0;
  while (true) {
    if (closed()) ++count;
    size_t j = stages.size();
    while (j-- > 0) {
      int q = stages[j];
      FiberMask lim = (FiberMask{1} << f.fiber_size(q)) - 1;
      if (mask[static_cast<size_t>(q)] < lim) {
        ++mask[static_cast<size_t>(q)];
        break;
      }
      mask[static_cast<size_t>(q)] = 0;
    }
    if (j == static_cast<size_t>(-1)) return count;
  }
}

}  // namespace

TEST_SUITE("presheaf") {

TEST_CASE("validation, restriction tables, and name lookups") {
  FinPoset p = chain2();
  Presheaf x = collapse(p);
  int bot = p.index_of("bot"), top = p.index_of("top");
  CHECK(x.fiber_size(bot) == 1);
  CHECK(x.fiber_size(top) == 2);
  CHECK(x.elem_name(top, 1) == "y");
  CHECK(x.elem_index(top, "y") == 1);
  CHECK(x.restrict_elem(top, bot, 1) == 0);
  CHECK(x.restrict_elem(top, top, 1) == 1);

  // Identity default: same names downstairs, no table needed.
  Presheaf b = const2(p);
  CHECK(b.restrict_elem(top, bot, 1) == 1);

  // Missing table with unmatched names.
  std::vector<std::vector<std::string>> bad(2);
  bad[static_cast<size_t>(bot)] = {"u"};
  bad[static_cast<size_t>(top)] = {"v"};
  CHECK_THROWS_AS(Presheaf::validate(p, bad, {}), MissingTable);

  // Fiber cap.
  std::vector<std::vector<std::string>> wide(2);
  for (int i = 0; i < 7; ++i) wide[0].push_back("e" + std::to_string(i));
  wide[1] = wide[0];
  CHECK_THROWS_AS(Presheaf::validate(p, wide, {}), FiberCapExceeded);
}

TEST_CASE("functoriality is rejected with a witness") {
  FinPoset p = FinPoset::validate({"lo", "mid", "hi"}, {{"lo", "mid"}, {"mid", "hi"}});
  int lo = p.index_of("lo"), mid = p.index_of("mid"), hi = p.index_of("hi");
  std::vector<std::vector<std::string>> fibers(3);
  fibers[static_cast<size_t>(lo)] = {"a", "b"};
  fibers[static_cast<size_t>(mid)] = {"m"};
  fibers[static_cast<size_t>(hi)] = {"t"};
  std::map<std::pair<int, int>, std::vector<int>> tables;
  tables[{hi, mid}] = {0};
  tables[{mid, lo}] = {0};
  tables[{hi, lo}] = {1};  // disagrees with the composite through mid
  CHECK_THROWS_AS(Presheaf::validate(p, fibers, tables), FunctorialityError);
  tables[{hi, lo}] = {0};
  CHECK(Presheaf::validate(p, fibers, tables).valid());
}

TEST_CASE("terminal and initial") {
  FinPoset p = fork_poset();
  Presheaf one = terminal_presheaf(p);
  Presheaf zero = initial_presheaf(p);
  for (int q = 0; q < p.size(); ++q) {
    CHECK(one.fiber_size(q) == 1);
    CHECK(zero.fiber_size(q) == 0);
  }
  CHECK(global_sections(one).size() == 1);
  CHECK(global_sections(zero).empty());
}

TEST_CASE("product: indices, projections, and naturality") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  ProductResult pr = product(x, b);
  int top = p.index_of("top"), bot = p.index_of("bot");
  CHECK(pr.obj.fiber_size(top) == 4);
  CHECK(pr.obj.fiber_size(bot) == 2);
  for (int i = 0; i < x.fiber_size(top); ++i)
    for (int j = 0; j < b.fiber_size(top); ++j) {
      int k = pair_index(pr.obj, top, i, j);
      // Frozen layout: left index is the high digit.
      CHECK(k == i * b.fiber_size(top) + j);
      auto [l, r] = pair_split(pr.obj, top, k);
      CHECK(l == i);
      CHECK(r == j);
      CHECK(pr.proj_left.at(top, k) == i);
      CHECK(pr.proj_right.at(top, k) == j);
      // Restriction of a pair is the pair of restrictions.
      int kd = pr.obj.restrict_elem(top, bot, k);
      auto [ld, rd] = pair_split(pr.obj, bot, kd);
      CHECK(ld == x.restrict_elem(top, bot, i));
      CHECK(rd == b.restrict_elem(top, bot, j));
    }
  CHECK(pr.obj.product_left()->same(x));
  CHECK(pr.obj.product_right()->same(b));
}

TEST_CASE("coproduct: tags, blocks, and restriction") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  CoproductResult co = coproduct(x, b);
  int top = p.index_of("top"), bot = p.index_of("bot");
  CHECK(co.obj.fiber_size(top) == 4);
  CHECK(co.obj.fiber_size(bot) == 3);
  // Left block first.
  for (int i = 0; i < x.fiber_size(top); ++i) {
    CHECK(inl_index(co.obj, top, i) == i);
    auto [tag, idx] = coproduct_split(co.obj, top, i);
    CHECK(tag == 0);
    CHECK(idx == i);
  }
  for (int j = 0; j < b.fiber_size(top); ++j) {
    int k = inr_index(co.obj, top, j);
    CHECK(k == x.fiber_size(top) + j);
    auto [tag, idx] = coproduct_split(co.obj, top, k);
    CHECK(tag == 1);
    CHECK(idx == j);
    CHECK(co.inj_right.at(top, j) == k);
  }
  // Restriction preserves the tag.
  for (int k = 0; k < co.obj.fiber_size(top); ++k) {
    auto [tag, idx] = coproduct_split(co.obj, top, k);
    auto [tag2, idx2] = coproduct_split(co.obj, bot, co.obj.restrict_elem(top, bot, k));
    CHECK(tag == tag2);
    int expect = tag == 0 ? x.restrict_elem(top, bot, idx) : b.restrict_elem(top, bot, idx);
    CHECK(idx2 == expect);
  }
}

TEST_CASE("construct dispatcher matches the direct builders") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  ConstructResult c1 = construct(ConstructKind::Product, p, {x, b});
  CHECK(c1.obj.fiber_size(p.index_of("top")) == 4);
  CHECK(c1.maps.size() == 2);
  ConstructResult c2 = construct(ConstructKind::Terminal, p, {});
  CHECK(c2.obj.fiber_size(0) == 1);
  CHECK_THROWS_AS(construct(ConstructKind::Product, p, {x}), ArityError);
}

TEST_CASE("power object fibers enumerate subpresheaves over each down-set") {
  FinPoset p = chain2();
  Presheaf x = collapse(p);
  Presheaf px = power_object(x);
  int top = p.index_of("top"), bot = p.index_of("bot");
  CHECK(px.fiber_size(bot) == count_subpresheaves(x, bot));  // 2
  CHECK(px.fiber_size(top) == count_subpresheaves(x, top));  // 5
  CHECK(px.fiber_size(bot) == 2);
  CHECK(px.fiber_size(top) == 5);

  const PowerProvData* prov = px.power_prov();
  REQUIRE(prov != nullptr);
  CHECK(prov->arg.same(x));
  // Choices are sorted and index_of inverts the ordering.
  for (int i = 0; i < px.fiber_size(top); ++i) {
    CHECK(prov->index_of(top, prov->choices[static_cast<size_t>(top)][static_cast<size_t>(i)]) == i);
    if (i > 0)
      CHECK(prov->choices[static_cast<size_t>(top)][static_cast<size_t>(i - 1)] <
            prov->choices[static_cast<size_t>(top)][static_cast<size_t>(i)]);
  }
  // Restriction = truncation to the smaller down-set.
  for (int i = 0; i < px.fiber_size(top); ++i) {
    SubChoice c = prov->choices[static_cast<size_t>(top)][static_cast<size_t>(i)];
    SubChoice trunc(c.size(), 0);
    trunc[static_cast<size_t>(bot)] = c[static_cast<size_t>(bot)];
    CHECK(px.restrict_elem(top, bot, i) == prov->index_of(bot, trunc));
  }

  // One-stage power object: index equals the fiber mask.
  FinPoset pt = FinPoset::validate({"pt"}, {});
  Presheaf b1 = Presheaf::validate(pt, {{"x", "y"}}, {});
  Presheaf pb = power_object(b1);
  CHECK(pb.fiber_size(0) == 4);
  for (int m = 0; m < 4; ++m) {
    CHECK(pb.power_prov()->index_of(0, {static_cast<FiberMask>(m)}) == m);
    for (int e = 0; e < 2; ++e)
      CHECK(pb.power_prov()->member(0, m, e) == (((m >> e) & 1) != 0));
  }
}

TEST_CASE("subobject classifier fibers count down-sets below each stage") {
  FinPoset p = fork_poset();
  Presheaf omega = power_object(terminal_presheaf(p));
  // Down-sets of a 1-element chain: 2; of the whole fork: 5.
  CHECK(omega.fiber_size(p.index_of("a")) == 2);
  CHECK(omega.fiber_size(p.index_of("top")) == 5);
}

TEST_CASE("exponentials agree with enumerated natural transformations") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  int top = p.index_of("top"), bot = p.index_of("bot");

  Presheaf xx = exponential(x, x);
  CHECK(xx.fiber_size(bot) == 1);
  CHECK(xx.fiber_size(top) == 4);

  // At a stage whose down-set is the whole poset, the exponential fiber
  // lists exactly the natural transformations.
  auto nats = enumerate_nat_trans(x, b);
  CHECK(exponential(x, b).fiber_size(top) == static_cast<int>(nats.size()));
  // Naturality from scratch on every enumerated transformation.
  for (const NatTrans& h : nats)
    for (int e = 0; e < x.fiber_size(top); ++e)
      CHECK(b.restrict_elem(top, bot, h.at(top, e)) ==
            h.at(bot, x.restrict_elem(top, bot, e)));

  // Constant-fiber case on the 2-chain: identity restrictions force the two
  // levels of a family to coincide, so B^B at top has |B|^|B| = 4 members.
  Presheaf bb = exponential(b, b);
  CHECK(bb.fiber_size(top) == 4);
  CHECK(enumerate_nat_trans(b, b).size() == 4);

  const ExpProvData* prov = bb.exp_prov();
  REQUIRE(prov != nullptr);
  for (int f = 0; f < bb.fiber_size(top); ++f) {
    if (f > 0)
      CHECK(prov->families[static_cast<size_t>(top)][static_cast<size_t>(f - 1)] <
            prov->families[static_cast<size_t>(top)][static_cast<size_t>(f)]);
    CHECK(prov->index_of(top, prov->families[static_cast<size_t>(top)][static_cast<size_t>(f)]) == f);
  }
}

TEST_CASE("global sections are the compatible families") {
  FinPoset p = chain2();
  Presheaf x = collapse(p);
  auto secs = global_sections(x);
  CHECK(secs.size() == 2);  // either top element restricts to the unique bottom one
  int top = p.index_of("top"), bot = p.index_of("bot");
  for (const auto& s : secs)
    CHECK(x.restrict_elem(top, bot, s[static_cast<size_t>(top)]) == s[static_cast<size_t>(bot)]);
}

TEST_CASE("nat trans validation rejects non-commuting squares") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  int top = p.index_of("top"), bot = p.index_of("bot");
  std::vector<std::vector<int>> comp(2);
  comp[static_cast<size_t>(bot)] = {1};     // x at bot -> y
  comp[static_cast<size_t>(top)] = {0, 1};  // x->x, y->y
  // Square fails: restrict(h(x)) = x but h(restrict(x)) = y.
  CHECK_THROWS_AS(NatTrans::validate(x, b, comp), FunctorialityError);
  // Both top elements collapse at bot, so a natural map must send them to
  // elements of b with a common restriction; constant components do.
  comp[static_cast<size_t>(bot)] = {0};
  comp[static_cast<size_t>(top)] = {0, 0};
  CHECK_NOTHROW(NatTrans::validate(x, b, comp));
}

TEST_CASE("image and generated subobjects are restriction-closed") {
  FinPoset p = chain2();
  Presheaf x = collapse(p), b = const2(p);
  int top = p.index_of("top"), bot = p.index_of("bot");
  // Collapse b onto the x element of x? No: map b -> x sending everything to x.
  std::vector<std::vector<int>> comp(2);
  comp[static_cast<size_t>(bot)] = {0, 0};
  comp[static_cast<size_t>(top)] = {0, 0};
  NatTrans h = NatTrans::validate(b, x, comp);
  Subpresheaf img = image(h);
  CHECK(img.contains(top, 0));
  CHECK(!img.contains(top, 1));
  CHECK(img.contains(bot, 0));

  Subpresheaf gen = sub_generated(x, top, 1);
  CHECK(gen.contains(top, 1));
  CHECK(!gen.contains(top, 0));
  CHECK(gen.contains(bot, 0));  // the restriction of y
  CHECK_THROWS_AS(sub_generated(x, top, 5), InputError);

  // Non-closed choices are rejected.
  std::vector<FiberMask> open(2, 0);
  open[static_cast<size_t>(top)] = 0b10;  // y upstairs without x downstairs
  CHECK_THROWS_AS(Subpresheaf::validate(x, open), InputError);
}

TEST_CASE("subobject lattice: meet, join, complement") {
  FinPoset p = chain2();
  Presheaf x = collapse(p);
  Presheaf px = power_object(x);
  const PowerProvData* prov = px.power_prov();
  int top = p.index_of("top");
  // Materialize every subpresheaf from the power fiber at top.
  std::vector<Subpresheaf> subs;
  for (const SubChoice& c : prov->choices[static_cast<size_t>(top)])
    subs.push_back(Subpresheaf::validate(x, c));
  REQUIRE(subs.size() == 5);
  for (const Subpresheaf& a : subs)
    for (const Subpresheaf& b2 : subs) {
      Subpresheaf m = sub_meet(a, b2), j = sub_join(a, b2);
      for (int q = 0; q < p.size(); ++q) {
        CHECK(m.chosen[static_cast<size_t>(q)] ==
              (a.chosen[static_cast<size_t>(q)] & b2.chosen[static_cast<size_t>(q)]));
        CHECK(j.chosen[static_cast<size_t>(q)] ==
              (a.chosen[static_cast<size_t>(q)] | b2.chosen[static_cast<size_t>(q)]));
      }
    }
  for (const Subpresheaf& a : subs) {
    Subpresheaf c = sub_complement_within(a);
    // Disjoint from a...
    for (int q = 0; q < p.size(); ++q)
      CHECK((c.chosen[static_cast<size_t>(q)] & a.chosen[static_cast<size_t>(q)]) == 0);
    // ...and the largest such: every disjoint subobject sits inside it.
    for (const Subpresheaf& d : subs) {
      bool disjoint = true;
      for (int q = 0; q < p.size(); ++q)
        if (d.chosen[static_cast<size_t>(q)] & a.chosen[static_cast<size_t>(q)]) disjoint = false;
      if (disjoint)
        for (int q = 0; q < p.size(); ++q)
          CHECK((d.chosen[static_cast<size_t>(q)] & ~c.chosen[static_cast<size_t>(q)]) == 0);
    }
  }
  // Mismatched ambients are rejected.
  Presheaf b = const2(p);
  CHECK_THROWS_AS(sub_meet(Subpresheaf::full(x), Subpresheaf::full(b)), AmbientMismatch);
}

TEST_CASE("quotient by an equivalence relation") {
  FinPoset p = chain2();
  Presheaf b = const2(p);
  ProductResult pr = product(b, b);
  int top = p.index_of("top"), bot = p.index_of("bot");

  // Total relation: everything identified; fibers become singletons.
  QuotientResult q1 = quotient(b, Subpresheaf::full(pr.obj));
  CHECK(q1.obj.fiber_size(top) == 1);
  CHECK(q1.obj.fiber_size(bot) == 1);
  CHECK(q1.proj.at(top, 0) == q1.proj.at(top, 1));

  // Diagonal: nothing identified.
  std::vector<FiberMask> diag(2, 0);
  for (int q = 0; q < p.size(); ++q)
    for (int i = 0; i < b.fiber_size(q); ++i)
      diag[static_cast<size_t>(q)] |= FiberMask{1} << pair_index(pr.obj, q, i, i);
  QuotientResult q2 = quotient(b, Subpresheaf::validate(pr.obj, diag));
  CHECK(q2.obj.fiber_size(top) == 2);

  // A non-symmetric relation is rejected with the witnessing stage.
  std::vector<FiberMask> bad = diag;
  bad[static_cast<size_t>(top)] |= FiberMask{1} << pair_index(pr.obj, top, 0, 1);
  bad[static_cast<size_t>(bot)] |= FiberMask{1} << pair_index(pr.obj, bot, 0, 1);
  CHECK_THROWS_AS(quotient(b, Subpresheaf::validate(pr.obj, bad)), NotEquivalence);

  // Relations must live on the square of the quotiented object.
  CHECK_THROWS_AS(quotient(collapse(p), Subpresheaf::full(pr.obj)), AmbientMismatch);
}

TEST_CASE("subchoice_of zeroes stages outside the down-set") {
  FinPoset p = fork_poset();
  Presheaf b = const2(p);
  Subpresheaf full = Subpresheaf::full(b);
  int a = p.index_of("a");
  SubChoice c = subchoice_of(full, a);
  CHECK(c[static_cast<size_t>(a)] == 0b11);
  CHECK(c[static_cast<size_t>(p.index_of("b"))] == 0);
  CHECK(c[static_cast<size_t>(p.index_of("top"))] == 0);
}

}  // TEST_SUITE
