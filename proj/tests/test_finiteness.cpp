#include <vector>

#include "doctest.h"
#include "toposlab/finiteness.hpp"
#include "toposlab/forcing.hpp"
#include "toposlab/model.hpp"
#include "toposlab/typecheck.hpp"

using namespace toposlab;

namespace {

// Index of the subobject with the given per-stage masks in the power fiber.
int idx_of(const KFamily& k, int stage, std::vector<FiberMask> masks) {
  int i = k.power.power_prov()->index_of(stage, masks);
  REQUIRE(i >= 0);
  return i;
}

}  // namespace

TEST_SUITE("finiteness") {

TEST_CASE("adjoin and union closures build the same family") {
  for (const char* name : {"point", "chain2", "fork", "crown", "antichain2"}) {
    Model m = builtin_model(name);
    CAPTURE(name);
    std::vector<Presheaf> objects = {terminal_presheaf(m.poset), initial_presheaf(m.poset)};
    for (const auto& [sort_name, p] : m.sorts) objects.push_back(p);
    // A couple of constructed shapes.
    const Presheaf& b = m.at("B");
    objects.push_back(coproduct(b, terminal_presheaf(m.poset)).obj);
    objects.push_back(product(b, b).obj);
    for (const Presheaf& a : objects) {
      try {
        KFamily adj = kfinite_by_adjoin(a);
        KFamily uni = kfinite_by_union(a);
        CHECK(adj.family.chosen == uni.family.chosen);
        for (int p = 0; p < m.poset.size(); ++p)
          CHECK(adj.power.fiber_size(p) == uni.power.fiber_size(p));
        // The family is itself a subpresheaf: closed under restriction.
        CHECK_NOTHROW(Subpresheaf::validate(adj.power, adj.family.chosen));
        // The empty subobject is finite at every stage.
        for (int p = 0; p < m.poset.size(); ++p) {
          std::vector<FiberMask> zero(static_cast<size_t>(m.poset.size()), 0);
          CHECK(adj.member(p, idx_of(adj, p, zero)));
        }
      } catch (const CapExceeded&) {
        // B*B on the wider shapes exceeds the family mask width; both
        // closures must refuse such fibers the same way.
        CHECK_THROWS_AS(kfinite_by_adjoin(a), CapExceeded);
        CHECK_THROWS_AS(kfinite_by_union(a), CapExceeded);
      }
    }
  }
}

TEST_CASE("the finiteness family of the terminal object on the 2-chain") {
  Model m = builtin_model("chain2");
  int bot = m.poset.index_of("bot"), top = m.poset.index_of("top");
  KFamily k = kfinite_by_adjoin(terminal_presheaf(m.poset));
  CHECK(k.power.fiber_size(bot) == 2);
  CHECK(k.power.fiber_size(top) == 3);

  // Members at top, by explicit choice vectors (index order: bot, top).
  std::vector<FiberMask> empty_sub{0, 0}, appears_below{1, 0}, full{1, 1};
  CHECK(k.member(top, idx_of(k, top, empty_sub)));
  CHECK(k.member(top, idx_of(k, top, full)));
  // The subobject that is empty upstairs but present downstairs is NOT
  // finite at top: no chain of adjunctions reaches it.
  CHECK(!k.member(top, idx_of(k, top, appears_below)));
  // Both subobjects over the bottom stage are finite there.
  CHECK(k.member(bot, idx_of(k, bot, {0, 0})));
  CHECK(k.member(bot, idx_of(k, bot, {1, 0})));
}

TEST_CASE("the finiteness family of the collapse presheaf on the 2-chain") {
  Model m = builtin_model("chain2");
  const Presheaf& x = m.at("X");
  int bot = m.poset.index_of("bot"), top = m.poset.index_of("top");
  REQUIRE(x.fiber_size(bot) == 1);
  REQUIRE(x.fiber_size(top) == 2);
  KFamily k = kfinite_by_adjoin(x);
  CHECK(k.power.fiber_size(top) == 5);
  // With masks (bot, top): finite at top are the empty subobject and the
  // three generated by upstairs elements; {x downstairs only} is not.
  CHECK(k.member(top, idx_of(k, top, {0, 0})));
  CHECK(!k.member(top, idx_of(k, top, {1, 0})));
  CHECK(k.member(top, idx_of(k, top, {1, 1})));
  CHECK(k.member(top, idx_of(k, top, {1, 2})));
  CHECK(k.member(top, idx_of(k, top, {1, 3})));
  CHECK(k.member(bot, idx_of(k, bot, {0, 0})));
  CHECK(k.member(bot, idx_of(k, bot, {1, 0})));
}

TEST_CASE("family membership matches forcing the raw higher-order definition") {
  // The tiny-model equivalence: precomputed lookup, strict forcing of the
  // expanded definition, and the family itself all agree pointwise.
  for (const char* name : {"point", "chain2"}) {
    Model m = builtin_model(name);
    CAPTURE(name);
    for (const auto& [sort_name, obj] : m.sorts) {
      CAPTURE(sort_name);
      Sort ps = Sort::pow(Sort::base_sort(sort_name));
      TypedSentence sen = typecheck(parse_formula("KFin(S)"), m, {{"S", ps}});

      EvalOptions fast;
      Evaluator ev_fast(m, fast);
      EvalOptions strict;
      strict.strict_kfin = true;
      Evaluator ev_strict(m, strict);

      const Presheaf& power = ev_fast.interpret(ps);
      KFamily k = kfinite_by_adjoin(obj);
      for (int p = 0; p < m.poset.size(); ++p)
        for (int s = 0; s < power.fiber_size(p); ++s) {
          std::vector<int> env = {s};
          bool direct = ev_strict.forces(p, sen, env);
          bool looked_up = ev_fast.forces(p, sen, env);
          CHECK(direct == looked_up);
          CHECK(looked_up == k.member(p, s));
        }
    }
  }
}

TEST_CASE("is_kfinite agrees with the family") {
  Model m = builtin_model("chain2");
  const Presheaf& x = m.at("X");
  KFamily k = kfinite_by_adjoin(x);
  int top = m.poset.index_of("top");
  const auto& choices = k.power.power_prov()->choices[static_cast<size_t>(top)];
  for (size_t i = 0; i < choices.size(); ++i) {
    Subpresheaf s = Subpresheaf::validate(x, choices[i]);
    CHECK(is_kfinite(x, s, top) == k.member(top, static_cast<int>(i)));
  }
}

TEST_CASE("computing over a shared power object") {
  Model m = builtin_model("chain2");
  const Presheaf& b = m.at("B");
  Presheaf power = power_object(b);
  KFamily on = kfinite_by_adjoin_on(power);
  CHECK(on.power.same(power));
  CHECK(on.family.chosen == kfinite_by_adjoin(b).family.chosen);
  KFamily on_union = kfinite_by_union_on(power);
  CHECK(on_union.power.same(power));
  CHECK(on_union.family.chosen == on.family.chosen);
}

TEST_CASE("caps stop explosive families") {
  Model m = builtin_model("fork");
  Presheaf pb = power_object(m.at("B"));
  CHECK_THROWS_AS(kfinite_by_adjoin(pb), CapExceeded);
}

}  // TEST_SUITE
