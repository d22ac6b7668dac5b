#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "toposlab/poset.hpp"

using namespace toposlab;

namespace {

FinPoset chain2() { return FinPoset::validate({"bot", "top"}, {{"bot", "top"}}); }

FinPoset chain3() {
  return FinPoset::validate({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
}

FinPoset fork_poset() {
  return FinPoset::validate({"a", "b", "top"}, {{"a", "top"}, {"b", "top"}});
}

FinPoset crown() {
  return FinPoset::validate({"p", "q", "r", "s"},
                            {{"p", "r"}, {"p", "s"}, {"q", "r"}, {"q", "s"}});
}

FinPoset antichain(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  return FinPoset::validate(names, {});
}

// Down-closedness checked from scratch, using only leq.
bool down_closed(const FinPoset& p, StageMask m) {
  for (int a = 0; a < p.size(); ++a)
    if ((m >> a) & 1u)
      for (int b = 0; b < p.size(); ++b)
        if (p.leq(b, a) && !((m >> b) & 1u)) return false;
  return true;
}

}  // namespace

TEST_SUITE("poset") {

TEST_CASE("transitive closure and order queries") {
  FinPoset p = chain3();
  CHECK(p.size() == 3);
  int a = p.index_of("a"), b = p.index_of("b"), c = p.index_of("c");
  CHECK(p.leq(a, c));  // not given directly; closure adds it
  CHECK(p.leq(a, a));
  CHECK(!p.leq(c, a));
  CHECK(p.leq(a, b));
  CHECK(p.down_mask(c) == 0b111u);
  CHECK(p.down_mask(a) == (StageMask(1) << a));
  CHECK(p.try_index_of("z") == std::nullopt);
  CHECK_THROWS_AS(p.index_of("z"), ForeignElement);
}

TEST_CASE("ascending order is a linear extension") {
  for (const FinPoset& p : {chain3(), fork_poset(), crown(), antichain(3)}) {
    std::vector<int> pos(static_cast<size_t>(p.size()));
    const auto& asc = p.ascending();
    REQUIRE(static_cast<int>(asc.size()) == p.size());
    for (size_t i = 0; i < asc.size(); ++i) pos[static_cast<size_t>(asc[i])] = static_cast<int>(i);
    for (int x = 0; x < p.size(); ++x)
      for (int y = 0; y < p.size(); ++y)
        if (p.leq(x, y) && x != y) CHECK(pos[static_cast<size_t>(x)] < pos[static_cast<size_t>(y)]);
  }
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS_AS(FinPoset::validate({"a", "b"}, {{"a", "b"}, {"b", "a"}}), CycleError);
  CHECK_THROWS_AS(FinPoset::validate({"a", "a"}, {}), DuplicateElement);
  CHECK_THROWS_AS(FinPoset::validate({"a"}, {{"a", "zz"}}), ForeignElement);
  std::vector<std::string> nine;
  for (int i = 0; i < 9; ++i) nine.push_back("e" + std::to_string(i));
  CHECK_THROWS_AS(FinPoset::validate(nine, {}), CapExceeded);  // default cap is 8
}

TEST_CASE("all_downsets matches a brute-force scan") {
  for (const FinPoset& p : {chain2(), chain3(), fork_poset(), crown(), antichain(4)}) {
    std::set<StageMask> expect;
    for (StageMask m = 0; m <= p.full_mask(); ++m)
      if (down_closed(p, m)) expect.insert(m);
    std::set<StageMask> got;
    for (const DownSet& d : all_downsets(p)) {
      CHECK(d.poset.same(p));
      got.insert(d.bits);
    }
    CHECK(got == expect);
  }
  CHECK(all_downsets(chain2()).size() == 3);
  CHECK(all_downsets(fork_poset()).size() == 5);
  CHECK(all_downsets(crown()).size() == 7);
  CHECK(all_downsets(antichain(4)).size() == 16);
}

TEST_CASE("down_closure is the least down-closed superset") {
  FinPoset p = crown();
  DownSet d = down_closure(p, {"r"});
  CHECK(d.contains(p.index_of("r")));
  CHECK(d.contains(p.index_of("p")));
  CHECK(d.contains(p.index_of("q")));
  CHECK(!d.contains(p.index_of("s")));
  CHECK(down_closed(p, d.bits));
  // Idempotent, monotone in the seed.
  CHECK(down_closure(p, d.bits).bits == d.bits);
  CHECK((down_closure(p, StageMask(0)).bits) == 0u);
  CHECK(down_closure(p, p.full_mask()).bits == p.full_mask());
}

TEST_CASE("heyting operations satisfy the algebra laws") {
  for (const FinPoset& p : {chain2(), chain3(), fork_poset(), crown(), antichain(3)}) {
    std::vector<DownSet> all = all_downsets(p);
    DownSet top = heyting_top(p), bot = heyting_bottom(p);
    CHECK(top.is_top());
    CHECK(bot.is_bottom());
    for (const DownSet& u : all) {
      CHECK(down_closed(p, heyting_neg(u).bits));
      CHECK(heyting_neg(u) == heyting_implies(u, bot));
      CHECK(heyting_meet(u, top) == u);
      CHECK(heyting_join(u, bot) == u);
      for (const DownSet& v : all) {
        CHECK(down_closed(p, heyting_meet(u, v).bits));
        CHECK(down_closed(p, heyting_join(u, v).bits));
        CHECK(down_closed(p, heyting_implies(u, v).bits));
        CHECK(heyting_meet(u, v) == heyting_meet(v, u));
        CHECK(heyting_join(u, v) == heyting_join(v, u));
        for (const DownSet& w : all) {
          // Residuation: u /\ v <= w  iff  u <= v -> w.
          bool lhs = (heyting_meet(u, v).bits & ~w.bits) == 0;
          bool rhs = (u.bits & ~heyting_implies(v, w).bits) == 0;
          CHECK(lhs == rhs);
          CHECK(heyting_meet(u, heyting_join(v, w)) ==
                heyting_join(heyting_meet(u, v), heyting_meet(u, w)));
          CHECK(heyting_join(u, heyting_meet(v, w)) ==
                heyting_meet(heyting_join(u, v), heyting_join(u, w)));
        }
      }
    }
  }
}

TEST_CASE("implies matches its pointwise definition") {
  for (const FinPoset& p : {chain3(), fork_poset(), crown()}) {
    std::vector<DownSet> all = all_downsets(p);
    for (const DownSet& u : all)
      for (const DownSet& v : all) {
        DownSet w = heyting_implies(u, v);
        for (int s = 0; s < p.size(); ++s) {
          bool expect = true;
          for (int q = 0; q < p.size(); ++q)
            if (p.leq(q, s) && u.contains(q) && !v.contains(q)) expect = false;
          CHECK(w.contains(s) == expect);
        }
      }
  }
}

TEST_CASE("heyting dispatcher agrees with the direct functions") {
  FinPoset p = fork_poset();
  std::vector<DownSet> all = all_downsets(p);
  for (const DownSet& u : all)
    for (const DownSet& v : all) {
      CHECK(heyting(p, HeytingOp::Meet, u, v) == heyting_meet(u, v));
      CHECK(heyting(p, HeytingOp::Join, u, v) == heyting_join(u, v));
      CHECK(heyting(p, HeytingOp::Implies, u, v) == heyting_implies(u, v));
    }
  CHECK(heyting(p, HeytingOp::Neg, all[1], std::nullopt) == heyting_neg(all[1]));
  CHECK(heyting(p, HeytingOp::Top, std::nullopt, std::nullopt) == heyting_top(p));
  CHECK(heyting(p, HeytingOp::Bottom, std::nullopt, std::nullopt) == heyting_bottom(p));
  FinPoset other = chain2();
  CHECK_THROWS_AS(heyting(p, HeytingOp::Meet, all[0], heyting_top(other)), PosetMismatch);
}

TEST_CASE("is_boolean iff antichain") {
  CHECK(is_boolean(antichain(1)));
  CHECK(is_boolean(antichain(2)));
  CHECK(is_boolean(antichain(4)));
  CHECK(!is_boolean(chain2()));
  CHECK(!is_boolean(fork_poset()));
  CHECK(!is_boolean(crown()));
  // Independent restatement: boolean iff u \/ ~u = top for every down-set.
  for (const FinPoset& p : {antichain(3), chain2(), crown()}) {
    bool lem = true;
    for (const DownSet& u : all_downsets(p))
      if (!heyting_join(u, heyting_neg(u)).is_top()) lem = false;
    CHECK(lem == is_boolean(p));
  }
}

TEST_CASE("downset printing") {
  FinPoset p = chain2();
  CHECK(down_closure(p, {"top"}).to_string() == "{bot,top}");
  CHECK(heyting_bottom(p).to_string() == "{}");
}

}  // TEST_SUITE
