#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "toposlab/model.hpp"
#include "toposlab/verify.hpp"

using namespace toposlab;

namespace {

bool all_checks_pass(const Report& r) {
  for (const ReportCheck& c : r.checks)
    if (!c.pass) return false;
  return true;
}

void expect_valid(const Report& r) {
  CAPTURE(r.scenario);
  CAPTURE(r.sentence);
  CHECK(r.verdict == Verdict::InternallyValid);
  CHECK(r.truth.is_top());
  CHECK(r.passed());
  CHECK(r.fails_at.empty());
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("induction, pigeonholes, and lemmas hold on the small models") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  for (const char* name : {"point", "chain2"}) {
    Model m = builtin_model(name);
    CAPTURE(name);
    expect_valid(check_finite_induction(m, "B", opts));
    expect_valid(check_dual_pigeonhole(m, "B", opts));
    expect_valid(check_weak_pigeonhole(m, "B", false, opts));
    expect_valid(check_finiteness_lemmas(m, "B", opts));
  }
}

TEST_CASE("weak pigeonhole on the wider posets") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  Model m = builtin_model("fork");
  Report r = check_weak_pigeonhole(m, "B", false, opts);
  expect_valid(r);
  // Both directions are checked: no injection in, no surjection out.
  REQUIRE(r.checks.size() >= 2);
  CHECK(all_checks_pass(r));
}

TEST_CASE("the subobject variant runs on a subterminal sort") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  for (const char* name : {"point", "chain2", "fork"}) {
    Model m = builtin_model(name);
    CAPTURE(name);
    DownSet u{m.poset, m.poset.down_mask(m.poset.ascending()[0])};
    Model sub = with_subterminal_sort(m, "U", u);
    const Presheaf& up = sub.at("U");
    for (int p = 0; p < m.poset.size(); ++p)
      CHECK(up.fiber_size(p) == (u.contains(p) ? 1 : 0));
    Report r = check_weak_pigeonhole(sub, "U", true, opts);
    expect_valid(r);
    CHECK(r.scenario == "weak-pigeonhole-subobject");
  }
  // The extent must be a down-set.
  Model m = builtin_model("chain2");
  DownSet not_down{m.poset, StageMask(1) << m.poset.index_of("top")};
  CHECK_THROWS_AS(with_subterminal_sort(m, "U", not_down), InputError);
}

TEST_CASE("constructed instances hit join(u, not u) exactly") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  for (const char* name : {"point", "chain2", "fork"}) {
    Model m = builtin_model(name);
    CAPTURE(name);
    for (const DownSet& u : all_downsets(m.poset)) {
      CAPTURE(u.to_string());
      DownSet decided = heyting_join(u, heyting_neg(u));

      CollisionInstance ci = build_collision_instance(m, u, opts);
      CHECK(ci.report.truth.bits == decided.bits);
      CHECK(all_checks_pass(ci.report));
      CHECK(ci.f.source.valid());

      UnreachedInstance ui = build_unreached_instance(m, u, opts);
      CHECK(ui.report.truth.bits == decided.bits);
      CHECK(all_checks_pass(ui.report));
      for (int p = 0; p < m.poset.size(); ++p)
        CHECK(ui.u_sub.contains(p, 0) == (u.contains(p) && ui.u_sub.of.fiber_size(p) > 0));
    }
  }
  // The flagship refutation: u = {bot} on the 2-chain.
  Model m = builtin_model("chain2");
  DownSet u{m.poset, m.poset.down_mask(m.poset.index_of("bot"))};
  CollisionInstance ci = build_collision_instance(m, u, opts);
  CHECK(truth_text(ci.report.truth) == "{bot}");
  CHECK(ci.report.verdict == Verdict::RefutationExhibited);
  CHECK(!ci.report.fails_at.empty());
  UnreachedInstance ui = build_unreached_instance(m, u, opts);
  CHECK(truth_text(ui.report.truth) == "{bot}");
  CHECK(ui.report.verdict == Verdict::RefutationExhibited);
}

TEST_CASE("the four-stage counterexample separates internal from external") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  Report r = check_external_counterexample(opts);
  CHECK(r.scenario == "external-counterexample");
  CHECK(all_checks_pass(r));
  CHECK(r.passed());
  CHECK(r.verdict == Verdict::InternallyValid);
  CHECK(!r.witnesses.empty());
  REQUIRE(r.checks.size() == 5);
}

TEST_CASE("report rendering is stable and machine-readable") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  Model m = builtin_model("chain2");
  Report r1 = check_dual_pigeonhole(m, "B", opts);
  Report r2 = check_dual_pigeonhole(m, "B", opts);
  CHECK(r1.to_json() == r2.to_json());
  CHECK(r1.to_text() == r2.to_text());

  auto j = nlohmann::json::parse(r1.to_json());
  CHECK(j["scenario"] == "dual-pigeonhole");
  CHECK(j["verdict"] == "InternallyValid");
  CHECK(j["truth_value"]["top"] == true);
  CHECK(j["stats"]["calls"].get<long long>() > 0);
  CHECK(j.contains("poset"));
  CHECK(j.contains("sentence"));

  std::string text = r1.to_text();
  CHECK(text.find("scenario: dual-pigeonhole") != std::string::npos);
  CHECK(text.find("verdict: InternallyValid") != std::string::npos);

  CHECK(poset_summary(m.poset) == "bot top | bot<=top");
  CHECK(truth_text(heyting_top(m.poset)) == "{bot,top} TOP");
  CHECK(truth_text(heyting_bottom(m.poset)) == "{} BOTTOM");
  CHECK(verdict_name(Verdict::FailsAt) == "FailsAt");
}

TEST_CASE("resource aborts surface as exceptions") {
  EvalOptions opts;
  opts.caps = Caps::suite();
  opts.budget = 10;
  Model m = builtin_model("chain2");
  CHECK_THROWS_AS(check_dual_pigeonhole(m, "B", opts), BudgetExceeded);

  EvalOptions tiny;
  tiny.caps = Caps{};
  tiny.caps.max_power_fiber = 4;
  CHECK_THROWS_AS(check_finite_induction(m, "B", tiny), CapExceeded);
}

}  // TEST_SUITE
