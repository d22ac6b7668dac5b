#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "json.hpp"
#include "toposlab/errors.hpp"
#include "toposlab/forcing.hpp"
#include "toposlab/logic.hpp"
#include "toposlab/model.hpp"
#include "toposlab/search.hpp"
#include "toposlab/typecheck.hpp"
#include "toposlab/verify.hpp"

namespace py = pybind11;

namespace {

using namespace toposlab;

EvalOptions make_options(bool strict_kfin, long long budget, long long power_cap,
                         Caps caps = Caps::suite()) {
  if (power_cap > 0) caps.max_power_fiber = static_cast<long>(power_cap);
  EvalOptions o;
  o.caps = caps;
  o.strict_kfin = strict_kfin;
  o.budget = budget;
  return o;
}

std::string truth_json(const DownSet& d) {
  nlohmann::json tv;
  tv["stages"] = nlohmann::json::array();
  for (int p = 0; p < d.poset.size(); ++p)
    if (d.contains(p)) tv["stages"].push_back(d.poset.element(p));
  tv["top"] = d.is_top();
  return tv.dump();
}

std::string eval_sentence_json(const Model& m, const std::string& sentence, bool strict_kfin,
                               long long budget, long long power_cap) {
  EvalOptions opts = make_options(strict_kfin, budget, power_cap, Caps{});
  Formula f = parse_formula(sentence);
  TypedSentence sen = typecheck(f, m);
  Evaluator ev(m, opts);
  DownSet truth = ev.truth_value(sen);
  nlohmann::json j;
  j["sentence"] = formula_to_string(f);
  j["truth_value"] = nlohmann::json::parse(truth_json(truth));
  j["stats"] = {{"calls", ev.stats().calls}, {"memo_hits", ev.stats().memo_hits}};
  return j.dump();
}

std::string run_scenario_json(const std::string& scenario, const Model& m,
                              const std::string& base, const std::vector<std::string>& downset,
                              bool strict_kfin, long long budget, long long power_cap) {
  EvalOptions opts = make_options(strict_kfin, budget, power_cap);
  DownSet u = downset.empty()
                  ? DownSet{m.poset, m.poset.down_mask(m.poset.ascending()[0])}
                  : down_closure(m.poset, downset);
  Report r;
  if (scenario == "finite-induction") r = check_finite_induction(m, base, opts);
  else if (scenario == "dual-pigeonhole") r = check_dual_pigeonhole(m, base, opts);
  else if (scenario == "weak-pigeonhole") r = check_weak_pigeonhole(m, base, false, opts);
  else if (scenario == "weak-pigeonhole-subobject") {
    Model sub = with_subterminal_sort(m, "U", u);
    r = check_weak_pigeonhole(sub, "U", true, opts);
  } else if (scenario == "collision-instance") r = build_collision_instance(m, u, opts).report;
  else if (scenario == "unreached-instance") r = build_unreached_instance(m, u, opts).report;
  else if (scenario == "finiteness-lemmas") r = check_finiteness_lemmas(m, base, opts);
  else if (scenario == "external-counterexample") r = check_external_counterexample(opts);
  else throw InputError("unknown scenario '" + scenario + "'");
  return r.to_json();
}

std::string search_json(const std::string& sentence, int max_poset, int max_fiber, bool first,
                        int jobs, long long budget, long long power_cap) {
  SearchBounds bounds;
  bounds.max_poset = max_poset;
  bounds.max_fiber = max_fiber;
  bounds.first_only = first;
  bounds.jobs = jobs;
  bounds.opts = make_options(false, budget, power_cap, Caps{});
  SearchResult res = search_counterexample(parse_formula(sentence), bounds);
  nlohmann::json j;
  j["hits"] = nlohmann::json::array();
  for (const SearchHit& h : res.hits) j["hits"].push_back(nlohmann::json::parse(h.report.to_json()));
  j["models_scanned"] = res.models_scanned;
  j["countermodels"] = res.hits.size();
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "finite presheaf models over posets with forcing semantics";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

  py::class_<Model>(m, "Model")
      .def(py::init([](const std::string& text) { return parse_model(text, Caps{}); }),
           py::arg("text"), "Parse a model file.")
      .def("to_text", [](const Model& m_) { return model_to_text(m_); },
           "Render back to the model file format.")
      .def("stages",
           [](const Model& m_) {
             std::vector<std::string> out;
             for (int p = 0; p < m_.poset.size(); ++p) out.push_back(m_.poset.element(p));
             return out;
           },
           "Stage names in internal order.")
      .def("sort_names",
           [](const Model& m_) {
             std::vector<std::string> out;
             for (const auto& s : m_.sorts) out.push_back(s.first);
             return out;
           })
      .def("__repr__", [](const Model& m_) {
        return "<Model poset=" + std::to_string(m_.poset.size()) + " stages, " +
               std::to_string(m_.sorts.size()) + " sorts>";
      });

  m.def("builtin_model_names", &builtin_model_names);
  m.def("builtin_model", &builtin_model, py::arg("name"));
  m.def("macro_names", &macro_names, "Names usable as formula macros.");

  m.def("eval_sentence_json", &eval_sentence_json, py::arg("model"), py::arg("sentence"),
        py::arg("strict_kfin") = false, py::arg("budget") = -1, py::arg("power_cap") = -1,
        "Evaluate a closed sentence; returns a JSON string with the truth value "
        "as its set of forcing stages.");

  m.def("run_scenario_json", &run_scenario_json, py::arg("scenario"), py::arg("model"),
        py::arg("base") = "B", py::arg("downset") = std::vector<std::string>{},
        py::arg("strict_kfin") = false, py::arg("budget") = -1, py::arg("power_cap") = -1,
        "Run one named scenario; returns the report as a JSON string. An empty "
        "downset means the first minimal stage.");

  m.def("search_json", &search_json, py::arg("sentence"), py::arg("max_poset") = 2,
        py::arg("max_fiber") = 2, py::arg("first") = false, py::arg("jobs") = 1,
        py::arg("budget") = -1, py::arg("power_cap") = -1,
        "Enumerate small models refuting a sentence; returns a JSON string.");
}
