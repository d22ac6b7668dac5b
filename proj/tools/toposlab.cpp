// toposlab: evaluate higher-order sentences over finite presheaf models,
// run the bundled pigeonhole/finiteness scenario suite, and hunt for
// countermodels. Exit codes: 0 success, 1 expectation mismatch, 2 input
// error, 3 resource abort.
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toposlab/errors.hpp"
#include "toposlab/forcing.hpp"
#include "toposlab/logic.hpp"
#include "toposlab/model.hpp"
#include "toposlab/search.hpp"
#include "toposlab/typecheck.hpp"
#include "toposlab/verify.hpp"

namespace {

using namespace toposlab;

struct CommonFlags {
  bool json = false;
  bool strict = false;
  long long budget = -1;  // unset; TOPOSLAB_BUDGET applies first, the flag wins
  long long power_cap = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_flag("--json", f.json, "machine-readable output");
  cmd->add_flag("--strict-kfin", f.strict,
                "evaluate finiteness through the raw higher-order formula");
  cmd->add_option("--budget", f.budget, "evaluator call budget")->check(CLI::PositiveNumber);
  cmd->add_option("--power-cap", f.power_cap, "per-stage power/exponential fiber cap")
      ->check(CLI::PositiveNumber);
}

std::optional<long long> env_budget() {
  const char* raw = std::getenv("TOPOSLAB_BUDGET");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  long long v = std::strtoll(raw, &end, 10);
  if (*end != '\0' || v <= 0)
    throw InputError("TOPOSLAB_BUDGET must be a positive integer, got '" + std::string(raw) +
                     "'");
  return v;
}

EvalOptions make_options(const CommonFlags& f, Caps caps) {
  if (f.power_cap > 0) caps.max_power_fiber = static_cast<long>(f.power_cap);
  EvalOptions o;
  o.caps = caps;
  o.strict_kfin = f.strict;
  if (auto b = env_budget()) o.budget = *b;
  if (f.budget > 0) o.budget = f.budget;
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/** Built-in model name, or else a model file path. */
Model load_model(const std::string& name_or_path, const Caps& caps) {
  for (const std::string& n : builtin_model_names())
    if (n == name_or_path) return builtin_model(name_or_path);
  return parse_model(read_file(name_or_path), caps);
}

/** Sentence from -f TEXT or --formula-file FILE; for `search` the -f value
 *  may also name a file. */
std::string sentence_text(const std::string& text, const std::string& file,
                          bool text_may_be_path) {
  if (!text.empty() && !file.empty())
    throw InputError("give the sentence either inline or as a file, not both");
  if (!file.empty()) return read_file(file);
  if (text.empty()) throw InputError("no sentence given (use -f or --formula-file)");
  if (text_may_be_path && std::ifstream(text).good()) return read_file(text);
  return text;
}

DownSet parse_downset(const FinPoset& poset, const std::string& csv) {
  std::vector<std::string> names;
  std::string cur;
  std::istringstream in(csv);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) names.push_back(cur);
  return down_closure(poset, names);
}

/** --expect value: "top", "bottom", or a comma-separated list of stages
 *  (closed downward before comparing). */
DownSet expected_downset(const FinPoset& poset, const std::string& spec) {
  if (spec == "top") return DownSet{poset, poset.full_mask()};
  if (spec == "bottom") return DownSet{poset, 0};
  return parse_downset(poset, spec);
}

int cmd_eval(const std::string& model_arg, const std::string& text, const std::string& file,
             const std::string& expect, const CommonFlags& flags) {
  EvalOptions opts = make_options(flags, Caps{});
  Model m = load_model(model_arg, opts.caps);
  Formula f = parse_formula(sentence_text(text, file, false));
  TypedSentence sen = typecheck(f, m);
  Evaluator ev(m, opts);
  DownSet truth = ev.truth_value(sen);
  if (flags.json) {
    nlohmann::json j;
    j["sentence"] = formula_to_string(f);
    nlohmann::json tv;
    tv["stages"] = nlohmann::json::array();
    for (int p = 0; p < truth.poset.size(); ++p)
      if (truth.contains(p)) tv["stages"].push_back(truth.poset.element(p));
    tv["top"] = truth.is_top();
    j["truth_value"] = tv;
    j["stats"] = {{"calls", ev.stats().calls}, {"memo_hits", ev.stats().memo_hits}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << truth_text(truth) << "\n";
  }
  if (!expect.empty()) {
    DownSet want = expected_downset(m.poset, expect);
    if (!(truth == want)) {
      std::cerr << "expected " << truth_text(want) << ", got " << truth_text(truth) << "\n";
      return 1;
    }
  }
  return 0;
}

/** Scenario table shared by `check` and `suite`. Instance scenarios take the
 *  down-set parameter; the others ignore it. */
Report run_scenario(const std::string& scenario, const Model& m, const std::string& base,
                    const DownSet& u, EvalOptions opts) {
  if (scenario == "finite-induction") return check_finite_induction(m, base, opts);
  if (scenario == "dual-pigeonhole") return check_dual_pigeonhole(m, base, opts);
  if (scenario == "weak-pigeonhole") return check_weak_pigeonhole(m, base, false, opts);
  if (scenario == "weak-pigeonhole-subobject") {
    Model sub = with_subterminal_sort(m, "U", u);
    return check_weak_pigeonhole(sub, "U", true, opts);
  }
  if (scenario == "collision-instance") return build_collision_instance(m, u, opts).report;
  if (scenario == "unreached-instance") return build_unreached_instance(m, u, opts).report;
  if (scenario == "finiteness-lemmas") return check_finiteness_lemmas(m, base, opts);
  if (scenario == "external-counterexample") return check_external_counterexample(opts);
  throw InputError(
      "unknown scenario '" + scenario +
      "' (expected finite-induction, dual-pigeonhole, weak-pigeonhole, "
      "weak-pigeonhole-subobject, collision-instance, unreached-instance, finiteness-lemmas "
      "or external-counterexample)");
}

/** A report counts as expected when every check passed and the sentence did
 *  not fail except by design (instance scenarios exhibit refutations). */
bool report_ok(const Report& r) {
  return r.passed() && r.verdict != Verdict::FailsAt;
}

int cmd_check(const std::string& scenario, const std::string& model_arg, const std::string& base,
              const std::string& downset_csv, const CommonFlags& flags) {
  EvalOptions opts = make_options(flags, Caps::suite());
  Model m = load_model(model_arg, opts.caps);
  DownSet u = downset_csv == "@min"
                  ? DownSet{m.poset, m.poset.down_mask(m.poset.ascending()[0])}
                  : parse_downset(m.poset, downset_csv);
  Report r = run_scenario(scenario, m, base, u, opts);
  std::cout << (flags.json ? r.to_json() + "\n" : r.to_text());
  return report_ok(r) ? 0 : 1;
}

struct SuiteTask {
  std::string label;
  std::function<Report(EvalOptions)> run;
};

std::vector<SuiteTask> suite_tasks() {
  std::vector<SuiteTask> tasks;
  for (const std::string model : {"point", "chain2", "fork", "crown"}) {
    auto fixed = [model](const std::string& scenario) {
      return SuiteTask{model + " " + scenario, [model, scenario](EvalOptions opts) {
                         Model m = builtin_model(model);
                         DownSet u{m.poset, m.poset.down_mask(m.poset.ascending()[0])};
                         return run_scenario(scenario, m, "B", u, opts);
                       }};
    };
    tasks.push_back(fixed("finite-induction"));
    tasks.push_back(fixed("dual-pigeonhole"));
    tasks.push_back(fixed("weak-pigeonhole"));
    tasks.push_back(fixed("weak-pigeonhole-subobject"));
    tasks.push_back(fixed("finiteness-lemmas"));
    Model probe = builtin_model(model);
    for (const DownSet& u : all_downsets(probe.poset)) {
      for (const std::string scenario : {"collision-instance", "unreached-instance"}) {
        std::string label = model + " " + scenario + " u=" + u.to_string();
        StageMask bits = u.bits;
        tasks.push_back({label, [model, scenario, bits](EvalOptions opts) {
                           Model m = builtin_model(model);
                           DownSet v{m.poset, bits};
                           return run_scenario(scenario, m, "B", v, opts);
                         }});
      }
    }
  }
  tasks.push_back({"crown external-counterexample",
                   [](EvalOptions opts) { return check_external_counterexample(opts); }});
  return tasks;
}

int cmd_suite(const std::string& name, int jobs, const CommonFlags& flags) {
  if (name != "benabou-loiseau")
    throw InputError("unknown suite '" + name + "' (expected benabou-loiseau)");
  EvalOptions opts = make_options(flags, Caps::suite());
  std::vector<SuiteTask> tasks = suite_tasks();

  struct Outcome {
    Report report;
    bool ran = false;
    std::string skip_reason;
  };
  std::vector<Outcome> outcomes(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      try {
        outcomes[i].report = tasks[i].run(opts);
        outcomes[i].ran = true;
      } catch (const CapExceeded& e) {
        outcomes[i].skip_reason = e.what();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  int ok = 0, skipped = 0, mismatched = 0;
  nlohmann::json results = nlohmann::json::array();
  for (size_t i = 0; i < tasks.size(); ++i) {
    const Outcome& oc = outcomes[i];
    std::string status;
    if (!oc.ran) {
      status = "SKIPPED";
      ++skipped;
    } else if (report_ok(oc.report)) {
      status = "ok";
      ++ok;
    } else {
      status = "MISMATCH";
      ++mismatched;
    }
    if (flags.json) {
      nlohmann::json row;
      row["label"] = tasks[i].label;
      row["status"] = status;
      if (!oc.ran) row["reason"] = oc.skip_reason;
      else row["report"] = nlohmann::json::parse(oc.report.to_json());
      results.push_back(row);
    } else {
      std::cout << status << "\t" << tasks[i].label;
      if (oc.ran)
        std::cout << "\t" << truth_text(oc.report.truth) << "\t"
                  << verdict_name(oc.report.verdict);
      else
        std::cout << "\t(" << oc.skip_reason << ")";
      std::cout << "\n";
      if (status == "MISMATCH")
        for (const ReportCheck& c : oc.report.checks)
          if (!c.pass) std::cout << "\tfailing check: " << c.label << "\n";
    }
  }
  if (flags.json) {
    nlohmann::json j;
    j["suite"] = name;
    j["results"] = results;
    j["summary"] = {{"total", tasks.size()},
                    {"ok", ok},
                    {"skipped", skipped},
                    {"mismatched", mismatched}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "suite " << name << ": " << tasks.size() << " scenarios, " << ok << " ok, "
              << skipped << " skipped, " << mismatched << " mismatched\n";
  }
  return mismatched == 0 ? 0 : 1;
}

int cmd_search(const std::string& text, const std::string& file, int max_poset, int max_fiber,
               bool first, int jobs, const CommonFlags& flags) {
  Formula sentence = parse_formula(sentence_text(text, file, true));
  SearchBounds bounds;
  bounds.max_poset = max_poset;
  bounds.max_fiber = max_fiber;
  bounds.first_only = first;
  bounds.jobs = jobs;
  bounds.opts = make_options(flags, Caps{});
  SearchResult res = search_counterexample(sentence, bounds);
  if (flags.json) {
    nlohmann::json j;
    j["hits"] = nlohmann::json::array();
    for (const SearchHit& h : res.hits)
      j["hits"].push_back(nlohmann::json::parse(h.report.to_json()));
    j["models_scanned"] = res.models_scanned;
    j["countermodels"] = res.hits.size();
    std::cout << j.dump() << "\n";
  } else {
    for (const SearchHit& h : res.hits) std::cout << h.report.to_text();
    std::cout << "scanned " << res.models_scanned << " models, " << res.hits.size()
              << " countermodels\n";
  }
  return 0;
}

int cmd_show(const std::string& name) {
  std::cout << model_to_text(builtin_model(name));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite presheaf models, forcing semantics, pigeonhole scenarios"};
  app.require_subcommand(1);

  std::string eval_model, eval_text, eval_file, eval_expect;
  CommonFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a sentence over a model");
  eval->add_option("-m,--model", eval_model, "model file or built-in name")->required();
  eval->add_option("-f,--formula", eval_text, "sentence text");
  eval->add_option("--formula-file", eval_file, "file containing the sentence");
  eval->add_option("--expect", eval_expect,
                   "fail (exit 1) unless the truth value is top, bottom, or the "
                   "given stage list");
  add_common(eval, eval_flags);

  std::string check_scenario, check_model = "chain2", check_base = "B", check_down = "@min";
  CommonFlags check_flags;
  CLI::App* check = app.add_subcommand("check", "run one named scenario");
  check->add_option("scenario", check_scenario, "scenario name")->required();
  check->add_option("-m,--model", check_model, "model file or built-in name (default chain2)");
  check->add_option("--base", check_base, "base sort the scenario quantifies over");
  check->add_option("--downset", check_down,
                    "comma-separated stages for instance scenarios (closed downward; "
                    "default: the first minimal stage)");
  add_common(check, check_flags);

  std::string suite_name;
  int suite_jobs = 1;
  CommonFlags suite_flags;
  CLI::App* suite = app.add_subcommand("suite", "run the bundled scenario suite");
  suite->add_option("name", suite_name, "suite name")->required();
  suite->add_option("--jobs", suite_jobs, "worker threads")->check(CLI::PositiveNumber);
  add_common(suite, suite_flags);

  std::string search_text, search_file;
  int search_max_poset = 2, search_max_fiber = 2, search_jobs = 1;
  bool search_first = false;
  CommonFlags search_flags;
  CLI::App* search = app.add_subcommand("search", "enumerate models refuting a sentence");
  search->add_option("-f,--formula", search_text, "sentence text or file");
  search->add_option("--formula-file", search_file, "file containing the sentence");
  search->add_option("--max-poset", search_max_poset, "stage bound for enumerated posets");
  search->add_option("--max-fiber", search_max_fiber, "fiber bound for enumerated presheaves");
  search->add_flag("--first", search_first, "stop at the first countermodel");
  search->add_option("--jobs", search_jobs, "worker threads")->check(CLI::PositiveNumber);
  add_common(search, search_flags);

  std::string show_name;
  CLI::App* show = app.add_subcommand("show", "print a built-in model as a model file");
  show->add_option("name", show_name, "built-in model name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eval->parsed())
      return cmd_eval(eval_model, eval_text, eval_file, eval_expect, eval_flags);
    if (check->parsed())
      return cmd_check(check_scenario, check_model, check_base, check_down, check_flags);
    if (suite->parsed()) return cmd_suite(suite_name, suite_jobs, suite_flags);
    if (search->parsed())
      return cmd_search(search_text, search_file, search_max_poset, search_max_fiber,
                        search_first, search_jobs, search_flags);
    if (show->parsed()) return cmd_show(show_name);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
