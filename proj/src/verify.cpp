#include "toposlab/verify.hpp"

#include <sstream>

#include "json.hpp"
#include "toposlab/finiteness.hpp"

namespace toposlab {

std::string truth_text(const DownSet& d) {
  std::string s = d.to_string();
  if (d.is_top()) s += " TOP";
  else if (d.is_bottom()) s += " BOTTOM";
  return s;
}

namespace {

std::string sort_line(const FinPoset& poset, const std::string& name, const Presheaf& ps) {
  std::string line = name + ":";
  for (int p = 0; p < poset.size(); ++p)
    line += " " + poset.element(p) + "=" + std::to_string(ps.fiber_size(p));
  return line;
}

Report blank_report(std::string scenario, const Model& m) {
  Report r;
  r.scenario = std::move(scenario);
  r.poset = poset_summary(m.poset);
  for (const auto& [name, ps] : m.sorts) r.sorts.push_back(sort_line(m.poset, name, ps));
  return r;
}

/** Sets verdict and fails_at from the truth value. `refutation` marks
 *  instances whose non-top value is the constructed point. */
void finish_verdict(Report& r, bool refutation) {
  if (r.truth.is_top()) {
    r.verdict = Verdict::InternallyValid;
    return;
  }
  r.verdict = refutation ? Verdict::RefutationExhibited : Verdict::FailsAt;
  const FinPoset& poset = r.truth.poset;
  for (int p = 0; p < poset.size(); ++p)
    if (!r.truth.contains(p)) r.fails_at.push_back(poset.element(p));
}

void require_down_set(const Model& m, const DownSet& u) {
  if (!u.poset.valid() || !u.poset.same(m.poset))
    throw PosetMismatch("the down-set must live on the model's poset");
  if (down_closure(m.poset, u.bits).bits != u.bits)
    throw InputError("the chosen stage set is not down-closed");
}

/** Family index of a transformation's tables in the exponential fiber at p. */
int family_index_at(const Presheaf& exp, const NatTrans& f, int p) {
  const FinPoset& poset = exp.poset();
  FamilyTables fam(static_cast<size_t>(poset.size()));
  for (int q = 0; q < poset.size(); ++q)
    if (poset.leq(q, p)) fam[static_cast<size_t>(q)] = f.comp[static_cast<size_t>(q)];
  int idx = exp.exp_prov()->index_of(p, fam);
  if (idx < 0) throw InternalError("transformation not found in the exponential fiber");
  return idx;
}

std::vector<std::vector<int>> bind_map_everywhere(Evaluator& ev, const Sort& fun_sort,
                                                  const NatTrans& f) {
  const Presheaf& exp = ev.interpret(fun_sort);
  std::vector<std::vector<int>> envs;
  for (int p = 0; p < ev.model().poset.size(); ++p) envs.push_back({family_index_at(exp, f, p)});
  return envs;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::InternallyValid: return "InternallyValid";
    case Verdict::FailsAt: return "FailsAt";
    case Verdict::RefutationExhibited: return "RefutationExhibited";
  }
  return "?";
}

std::string poset_summary(const FinPoset& p) {
  std::string out;
  for (int i = 0; i < p.size(); ++i) {
    if (i) out += " ";
    out += p.element(i);
  }
  std::string rel;
  for (int a = 0; a < p.size(); ++a)
    for (int b = 0; b < p.size(); ++b)
      if (a != b && p.leq(a, b)) rel += " " + p.element(a) + "<=" + p.element(b);
  return rel.empty() ? out : out + " |" + rel;
}

bool Report::passed() const {
  for (const ReportCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "scenario: " << scenario << "\n";
  os << "  poset: " << poset << "\n";
  for (const std::string& s : sorts) os << "  sort " << s << "\n";
  os << "  sentence: " << sentence << "\n";
  os << "  truth: " << truth_text(truth) << "\n";
  os << "  verdict: " << verdict_name(verdict);
  if (!fails_at.empty()) {
    os << " (";
    for (size_t i = 0; i < fails_at.size(); ++i) os << (i ? "," : "") << fails_at[i];
    os << ")";
  }
  os << "\n";
  for (const ReportCheck& c : checks)
    os << "  check " << c.label << ": " << (c.pass ? "ok" : "FAIL") << "\n";
  for (const std::string& w : witnesses) os << "  witness " << w << "\n";
  os << "  stats: " << stats.calls << " calls, " << stats.memo_hits << " memo hits\n";
  return os.str();
}

std::string Report::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["poset"] = poset;
  j["sorts"] = sorts;
  j["sentence"] = sentence;
  nlohmann::json tv;
  tv["stages"] = nlohmann::json::array();
  for (int p = 0; p < truth.poset.size(); ++p)
    if (truth.contains(p)) tv["stages"].push_back(truth.poset.element(p));
  tv["top"] = truth.is_top();
  j["truth_value"] = tv;
  j["verdict"] = verdict_name(verdict);
  j["fails_at"] = fails_at;
  j["witnesses"] = witnesses;
  nlohmann::json cs = nlohmann::json::array();
  for (const ReportCheck& c : checks) cs.push_back({{"label", c.label}, {"pass", c.pass}});
  j["checks"] = cs;
  j["stats"] = {{"calls", stats.calls}, {"memo_hits", stats.memo_hits}};
  return j.dump();
}

Report check_finite_induction(const Model& m, const std::string& base, EvalOptions opts) {
  Report r = blank_report("finite-induction", m);
  std::string text =
      "forall M:P(P(" + base + ")). ((forall A:P(" + base + "). ((KFin(A) /\\ (forall C:P(" +
      base +
      "). ((ComplIn(C,A) /\\ ProperIn(C,A)) -> C in M))) -> A in M)) -> (forall S:P(" + base +
      "). (KFin(S) -> S in M)))";
  Evaluator ev(m, opts);
  TypedSentence sen = typecheck(parse_formula(text), m);
  r.sentence = text;
  r.truth = ev.truth_value(sen);
  r.stats = ev.stats();
  finish_verdict(r, false);
  return r;
}

Report check_dual_pigeonhole(const Model& m, const std::string& base, EvalOptions opts) {
  Report r = blank_report("dual-pigeonhole", m);
  const std::string& b = base;
  std::string text = "forall A:P(" + b + "). forall F:P(" + b + "*" + b +
                     "). (((KFin(A) /\\ Compl(A)) /\\ (Proper(A) /\\ FunRel(F,A))) -> (exists y:" +
                     b + ". ~(exists x:" + b + ". (x in A /\\ pair(x,y) in F))))";
  Evaluator ev(m, opts);
  TypedSentence sen = typecheck(parse_formula(text), m);
  r.sentence = text;
  r.truth = ev.truth_value(sen);
  r.stats = ev.stats();
  finish_verdict(r, false);
  return r;
}

Report check_weak_pigeonhole(const Model& m, const std::string& base, bool subobject_variant,
                             EvalOptions opts) {
  Report r =
      blank_report(subobject_variant ? "weak-pigeonhole-subobject" : "weak-pigeonhole", m);
  const std::string& x = base;
  std::string inj_text =
      "~(exists F:P((" + x + "+1)*" + x + "). (FunRelTotal(F) /\\ Inj(F)))";
  std::string dual_text =
      "~(exists F:P(" + x + "*(" + x + "+1)). (FunRelTotal(F) /\\ Surj(F)))";
  Evaluator ev(m, opts);
  TypedSentence inj = typecheck(parse_formula(inj_text), m);
  TypedSentence dual = typecheck(parse_formula(dual_text), m);
  r.sentence = inj_text;
  r.truth = ev.truth_value(inj);
  DownSet dual_truth = ev.truth_value(dual);
  r.checks.push_back({"no-injection-of-extended", r.truth.is_top()});
  r.checks.push_back({"no-surjection-onto-extended", dual_truth.is_top()});
  r.witnesses.push_back("dual sentence: " + dual_text + " -> " + truth_text(dual_truth));
  r.stats = ev.stats();
  finish_verdict(r, false);
  return r;
}

CollisionInstance build_collision_instance(const Model& m, const DownSet& u, EvalOptions opts) {
  require_down_set(m, u);
  const FinPoset& poset = m.poset;
  int n = poset.size();

  // Two points, identified over u.
  Presheaf one = terminal_presheaf(poset);
  Presheaf two = coproduct(one, one).obj;
  ProductResult sq = product(two, two);
  std::vector<FiberMask> rel(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    FiberMask diag = 0;
    for (int i = 0; i < 2; ++i)
      diag |= FiberMask(1) << pair_index(sq.obj, p, i, i);
    rel[static_cast<size_t>(p)] = u.contains(p) ? (FiberMask(1) << 4) - 1 : diag;
  }
  QuotientResult q = quotient(two, Subpresheaf::validate(sq.obj, std::move(rel)));

  Model md;
  md.poset = poset;
  md.add("X", q.obj);

  // f sends both classes to the class of the first point and the extra
  // point to the class of the second; collisions appear exactly where the
  // two classes merge or provably differ.
  Presheaf ext = coproduct(q.obj, one).obj;
  std::vector<std::vector<int>> comp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    int k = q.obj.fiber_size(p);
    comp[static_cast<size_t>(p)].assign(static_cast<size_t>(k) + 1, q.proj.at(p, 0));
    comp[static_cast<size_t>(p)].back() = q.proj.at(p, 1);
  }
  NatTrans f = NatTrans::validate(ext, q.obj, std::move(comp));

  Sort ext_sort = Sort::sum(Sort::base_sort("X"), Sort::unit());
  Sort fun_sort = Sort::fun(ext_sort, Sort::base_sort("X"));
  std::string text = "exists x:X+1. exists y:X+1. (f(x) = f(y) /\\ ~x = y)";

  Report r = blank_report("collision-instance u=" + u.to_string(), md);
  Evaluator ev(md, opts);
  TypedSentence sen = typecheck(parse_formula(text), md, {{"f", fun_sort}});
  r.sentence = text;
  auto envs = bind_map_everywhere(ev, fun_sort, f);
  r.truth = ev.truth_value(sen, envs);

  DownSet expected = heyting_join(u, heyting_neg(u));
  r.checks.push_back({"truth-equals-u-or-not-u", r.truth.bits == expected.bits});

  // A colliding pair at every forcing stage.
  TypedSentence body = typecheck(parse_formula("f(x) = f(y) /\\ ~x = y"), md,
                                 {{"f", fun_sort}, {"x", ext_sort}, {"y", ext_sort}});
  const Presheaf& ext_i = ev.interpret(ext_sort);
  for (int p = 0; p < n; ++p) {
    if (!r.truth.contains(p)) continue;
    bool found = false;
    for (int i = 0; i < ext_i.fiber_size(p) && !found; ++i)
      for (int j = 0; j < ext_i.fiber_size(p) && !found; ++j)
        if (ev.forces(p, body, {envs[static_cast<size_t>(p)][0], i, j})) {
          r.witnesses.push_back("at " + poset.element(p) + ": x = " + ext_i.elem_name(p, i) +
                                ", y = " + ext_i.elem_name(p, j));
          found = true;
        }
  }
  r.stats = ev.stats();
  finish_verdict(r, true);
  return {q.obj, std::move(f), std::move(r)};
}

Model with_subterminal_sort(const Model& m, const std::string& name, const DownSet& u) {
  require_down_set(m, u);
  int n = m.poset.size();
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    if (u.contains(p)) fibers[static_cast<size_t>(p)] = {"*"};
  Model out = m;
  out.add(name, Presheaf::validate(m.poset, std::move(fibers), {}));
  return out;
}

UnreachedInstance build_unreached_instance(const Model& m, const DownSet& u, EvalOptions opts) {
  require_down_set(m, u);
  const FinPoset& poset = m.poset;
  int n = poset.size();

  Model base;
  base.poset = poset;
  Model md = with_subterminal_sort(base, "U", u);
  const Presheaf& sub = md.at("U");

  Presheaf one = terminal_presheaf(poset);
  Presheaf ext = coproduct(sub, one).obj;
  std::vector<std::vector<int>> comp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    if (u.contains(p)) comp[static_cast<size_t>(p)] = {inr_index(ext, p, 0)};
  NatTrans f = NatTrans::validate(sub, ext, std::move(comp));

  Sort ext_sort = Sort::sum(Sort::base_sort("U"), Sort::unit());
  Sort fun_sort = Sort::fun(Sort::base_sort("U"), ext_sort);
  std::string text = "exists x:U+1. ~(exists z:U. f(z) = x)";

  Report r = blank_report("unreached-instance u=" + u.to_string(), md);
  Evaluator ev(md, opts);
  TypedSentence sen = typecheck(parse_formula(text), md, {{"f", fun_sort}});
  r.sentence = text;
  auto envs = bind_map_everywhere(ev, fun_sort, f);
  r.truth = ev.truth_value(sen, envs);

  DownSet expected = heyting_join(u, heyting_neg(u));
  r.checks.push_back({"truth-equals-u-or-not-u", r.truth.bits == expected.bits});

  TypedSentence body = typecheck(parse_formula("~(exists z:U. f(z) = x)"), md,
                                 {{"f", fun_sort}, {"x", ext_sort}});
  const Presheaf& ext_i = ev.interpret(ext_sort);
  for (int p = 0; p < n; ++p) {
    if (!r.truth.contains(p)) continue;
    for (int i = 0; i < ext_i.fiber_size(p); ++i)
      if (ev.forces(p, body, {envs[static_cast<size_t>(p)][0], i})) {
        r.witnesses.push_back("at " + poset.element(p) + ": x = " + ext_i.elem_name(p, i));
        break;
      }
  }
  r.stats = ev.stats();
  finish_verdict(r, true);

  std::vector<FiberMask> chosen(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) chosen[static_cast<size_t>(p)] = u.contains(p) ? 1 : 0;
  Subpresheaf u_sub = Subpresheaf::validate(one, std::move(chosen));
  return {std::move(u_sub), std::move(f), std::move(r)};
}

Report check_finiteness_lemmas(const Model& m, const std::string& base, EvalOptions opts) {
  Report r = blank_report("finiteness-lemmas", m);
  const std::string& b = base;
  std::string empty_or_inhab = "forall A:P(" + b + "). (KFin(A) -> ((forall y:" + b +
                               ". ~y in A) \\/ Inhab(A)))";
  std::string compl_finite = "forall A:P(" + b + "). forall C:P(" + b +
                             "). ((KFin(A) /\\ ComplIn(C,A)) -> KFin(C))";
  std::string proper_or_equal =
      "forall A:P(" + b + "). forall C:P(" + b +
      "). ((KFin(A) /\\ ComplIn(C,A)) -> (ProperIn(C,A) \\/ (forall y:" + b +
      ". ((y in C -> y in A) /\\ (y in A -> y in C)))))";

  Evaluator ev(m, opts);
  DownSet d1 = ev.truth_value(typecheck(parse_formula(empty_or_inhab), m));
  DownSet d2 = ev.truth_value(typecheck(parse_formula(compl_finite), m));
  DownSet d3 = ev.truth_value(typecheck(parse_formula(proper_or_equal), m));
  r.sentence = "(" + empty_or_inhab + ") /\\ (" + compl_finite + ") /\\ (" + proper_or_equal + ")";
  r.truth = heyting_meet(heyting_meet(d1, d2), d3);
  r.checks.push_back({"empty-or-inhabited", d1.is_top()});
  r.checks.push_back({"complemented-subset-finite", d2.is_top()});
  r.checks.push_back({"proper-or-equal", d3.is_top()});
  r.stats = ev.stats();
  finish_verdict(r, false);
  return r;
}

Report check_external_counterexample(EvalOptions opts) {
  Model m = builtin_model("crown");
  const FinPoset& poset = m.poset;
  int n = poset.size();
  const Presheaf& a = m.at("A");

  Report r = blank_report("external-counterexample", m);

  r.checks.push_back({"no-global-section", global_sections(a).empty()});

  Evaluator ev(m, opts);

  // The full subobject, internally: inhabited and finite.
  Subpresheaf full = Subpresheaf::full(a);
  Sort pow_a = Sort::pow(Sort::base_sort("A"));
  TypedSentence inhab_fin =
      typecheck(parse_formula("Inhab(S) /\\ KFin(S)"), m, {{"S", pow_a}});
  const Presheaf& power = ev.interpret(pow_a);
  std::vector<std::vector<int>> envs;
  for (int p = 0; p < n; ++p) {
    int idx = power.power_prov()->index_of(p, subchoice_of(full, p));
    if (idx < 0) throw InternalError("full subobject missing from the power fiber");
    envs.push_back({idx});
  }
  DownSet inhab_truth = ev.truth_value(inhab_fin, envs);
  r.checks.push_back({"inhabited-and-finite", inhab_truth.is_top()});

  KFamily k = kfinite_by_adjoin(a, opts.caps);
  bool in_family = true;
  for (int p = 0; p < n; ++p) {
    int idx = k.power.power_prov()->index_of(p, subchoice_of(full, p));
    if (idx < 0 || !k.member(p, idx)) in_family = false;
  }
  r.checks.push_back({"full-subobject-in-family", in_family});

  // Internally a two-point set.
  std::string iso_text =
      "exists R:P(A*(1+1)). ((FunRelTotal(R) /\\ Inj(R)) /\\ Surj(R))";
  TypedSentence iso = typecheck(parse_formula(iso_text), m);
  r.sentence = iso_text;
  r.truth = ev.truth_value(iso);
  r.checks.push_back({"internally-two-point", r.truth.is_top()});

  // Externally: collapse A onto the extra summand; A+1 has no global
  // section avoiding the image, since such a section would cut out a global
  // section of A itself.
  Presheaf ext = coproduct(a, terminal_presheaf(poset)).obj;
  std::vector<std::vector<int>> comp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p)
    comp[static_cast<size_t>(p)].assign(static_cast<size_t>(a.fiber_size(p)),
                                        inr_index(ext, p, 0));
  NatTrans f = NatTrans::validate(a, ext, std::move(comp));
  Subpresheaf img = image(f);
  auto sections = global_sections(ext);
  bool escape = false;
  for (const auto& s : sections) {
    bool avoids = true;
    for (int p = 0; p < n; ++p)
      if (img.contains(p, s[static_cast<size_t>(p)])) avoids = false;
    if (avoids) escape = true;
  }
  r.checks.push_back({"no-external-escape", !escape});
  r.witnesses.push_back("global sections of A+1: " + std::to_string(sections.size()) +
                        ", all meeting the image");

  r.stats = ev.stats();
  finish_verdict(r, false);
  return r;
}

}  // namespace toposlab
