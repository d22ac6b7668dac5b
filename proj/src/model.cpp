#include "toposlab/model.hpp"

#include <map>
#include <sstream>

namespace toposlab {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

struct PresheafDraft {
  std::string name;
  std::map<std::string, std::vector<std::string>> stages;
  // (from stage, to stage) -> elem name -> elem name
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> maps;
};

}  // namespace

const Presheaf* Model::find(const std::string& name) const {
  for (const auto& [n, p] : sorts)
    if (n == name) return &p;
  return nullptr;
}

const Presheaf& Model::at(const std::string& name) const {
  const Presheaf* p = find(name);
  if (!p) throw UnknownBaseSort("no presheaf named '" + name + "' in the model");
  return *p;
}

Model& Model::add(std::string name, Presheaf p) {
  if (find(name)) throw DuplicateElement("presheaf '" + name + "' declared twice");
  if (!poset.valid())
    poset = p.poset();
  else if (!poset.same(p.poset()))
    throw PosetMismatch("presheaf '" + name + "' lives on a different poset");
  sorts.emplace_back(std::move(name), std::move(p));
  return *this;
}

Model parse_model(const std::string& text, const Caps& caps) {
  std::vector<std::string> poset_elems;
  std::vector<std::pair<std::string, std::string>> leq;
  std::vector<PresheafDraft> drafts;
  bool poset_seen = false;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw SyntaxError(msg, lineno, 1);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;

    if (line.rfind("poset:", 0) == 0) {
      if (poset_seen) fail("duplicate poset line");
      poset_seen = true;
      poset_elems = split_ws(line.substr(6));
      if (poset_elems.empty()) fail("poset line lists no elements");
      continue;
    }
    if (line.rfind("leq:", 0) == 0) {
      auto parts = split_ws(line.substr(4));
      if (parts.size() != 3 || parts[1] != "<=") fail("expected 'leq: a <= b'");
      leq.emplace_back(parts[0], parts[2]);
      continue;
    }
    if (line.rfind("presheaf", 0) == 0) {
      auto rest = trim(line.substr(8));
      if (rest.empty() || rest.back() != ':') fail("expected 'presheaf Name:'");
      PresheafDraft d;
      d.name = trim(rest.substr(0, rest.size() - 1));
      if (d.name.empty()) fail("presheaf needs a name");
      drafts.push_back(std::move(d));
      continue;
    }
    if (line.rfind("stage", 0) == 0) {
      if (drafts.empty()) fail("stage line before any presheaf");
      auto open = line.find('{');
      auto close = line.rfind('}');
      if (open == std::string::npos || close == std::string::npos || close < open)
        fail("expected 'stage p { elems }'");
      std::string stage = trim(line.substr(5, open - 5));
      if (stage.empty()) fail("stage needs a poset element name");
      auto& d = drafts.back();
      if (d.stages.count(stage)) fail("duplicate stage '" + stage + "' in presheaf " + d.name);
      d.stages[stage] = split_ws(line.substr(open + 1, close - open - 1));
      continue;
    }
    if (line.rfind("map", 0) == 0) {
      if (drafts.empty()) fail("map line before any presheaf");
      // map p -> q : x => y
      auto arrow = line.find("->");
      auto colon = line.find(':', arrow == std::string::npos ? 0 : arrow);
      auto becomes = line.find("=>");
      if (arrow == std::string::npos || colon == std::string::npos ||
          becomes == std::string::npos || becomes < colon)
        fail("expected 'map p -> q : x => y'");
      std::string from = trim(line.substr(3, arrow - 3));
      std::string to = trim(line.substr(arrow + 2, colon - arrow - 2));
      std::string src = trim(line.substr(colon + 1, becomes - colon - 1));
      std::string dst = trim(line.substr(becomes + 2));
      if (from.empty() || to.empty() || src.empty() || dst.empty())
        fail("expected 'map p -> q : x => y'");
      auto& entry = drafts.back().maps[{from, to}];
      if (entry.count(src))
        fail("element '" + src + "' mapped twice along " + from + " -> " + to);
      entry[src] = dst;
      continue;
    }
    fail("unrecognized line '" + line + "'");
  }
  if (!poset_seen) throw InputError("model has no poset line");

  Model m;
  m.poset = FinPoset::validate(poset_elems, leq, caps);

  for (const auto& d : drafts) {
    std::vector<std::vector<std::string>> fibers(static_cast<size_t>(m.poset.size()));
    for (int p = 0; p < m.poset.size(); ++p) {
      auto it = d.stages.find(m.poset.element(p));
      if (it == d.stages.end())
        throw InputError("presheaf '" + d.name + "' does not declare stage '" +
                         m.poset.element(p) + "'");
      fibers[static_cast<size_t>(p)] = it->second;
    }
    for (const auto& [key, table] : d.stages)
      if (!m.poset.try_index_of(key))
        throw ForeignElement("presheaf '" + d.name + "' declares unknown stage '" + key + "'");

    std::map<std::pair<int, int>, std::vector<int>> tables;
    for (const auto& [key, assoc] : d.maps) {
      const auto& [from, to] = key;
      int p = m.poset.index_of(from), q = m.poset.index_of(to);
      const auto& src_fiber = fibers[static_cast<size_t>(p)];
      const auto& dst_fiber = fibers[static_cast<size_t>(q)];
      std::vector<int> table;
      table.reserve(src_fiber.size());
      for (const auto& name : src_fiber) {
        auto it = assoc.find(name);
        if (it == assoc.end())
          throw MissingTable("presheaf '" + d.name + "': map " + from + " -> " + to +
                             " does not cover element '" + name + "'");
        auto pos = std::find(dst_fiber.begin(), dst_fiber.end(), it->second);
        if (pos == dst_fiber.end())
          throw ForeignElement("presheaf '" + d.name + "': map " + from + " -> " + to +
                               " sends '" + name + "' to unknown element '" + it->second + "'");
        table.push_back(static_cast<int>(pos - dst_fiber.begin()));
      }
      for (const auto& [src, dst] : assoc)
        if (std::find(src_fiber.begin(), src_fiber.end(), src) == src_fiber.end())
          throw ForeignElement("presheaf '" + d.name + "': map " + from + " -> " + to +
                               " mentions unknown element '" + src + "'");
      tables[{p, q}] = std::move(table);
    }
    m.add(d.name, Presheaf::validate(m.poset, std::move(fibers), tables, caps));
  }
  return m;
}

std::string model_to_text(const Model& m) {
  std::ostringstream out;
  out << "poset:";
  for (const auto& e : m.poset.elements()) out << " " << e;
  out << "\n";
  for (int q = 0; q < m.poset.size(); ++q)
    for (int p = 0; p < m.poset.size(); ++p)
      if (p != q && m.poset.leq(q, p)) out << "leq: " << m.poset.element(q) << " <= "
                                           << m.poset.element(p) << "\n";
  for (const auto& [name, ps] : m.sorts) {
    out << "presheaf " << name << ":\n";
    for (int p = 0; p < m.poset.size(); ++p) {
      out << "stage " << m.poset.element(p) << " {";
      for (const auto& e : ps.fiber(p)) out << " " << e;
      out << " }\n";
    }
    for (int p = 0; p < m.poset.size(); ++p)
      for (int q = 0; q < m.poset.size(); ++q) {
        if (p == q || !m.poset.leq(q, p)) continue;
        bool identity_by_name = true;
        for (int x = 0; x < ps.fiber_size(p) && identity_by_name; ++x)
          if (ps.elem_name(q, ps.restrict_elem(p, q, x)) != ps.elem_name(p, x))
            identity_by_name = false;
        if (identity_by_name) continue;
        for (int x = 0; x < ps.fiber_size(p); ++x)
          out << "map " << m.poset.element(p) << " -> " << m.poset.element(q) << " : "
              << ps.elem_name(p, x) << " => " << ps.elem_name(q, ps.restrict_elem(p, q, x))
              << "\n";
      }
  }
  return out.str();
}

namespace {

Presheaf const2(const FinPoset& poset) {
  std::vector<std::vector<std::string>> fibers(static_cast<size_t>(poset.size()), {"x", "y"});
  return Presheaf::validate(poset, std::move(fibers), {});
}

Model make_builtin(const std::string& name) {
  if (name == "point") {
    Model m;
    m.poset = FinPoset::validate({"pt"}, {});
    m.add("B", const2(m.poset));
    return m;
  }
  if (name == "chain2") {
    Model m;
    m.poset = FinPoset::validate({"bot", "top"}, {{"bot", "top"}});
    m.add("B", const2(m.poset));
    std::map<std::pair<int, int>, std::vector<int>> collapse;
    collapse[{1, 0}] = {0, 0};
    m.add("X", Presheaf::validate(m.poset, {{"x"}, {"x", "y"}}, collapse));
    return m;
  }
  if (name == "fork") {
    Model m;
    m.poset = FinPoset::validate({"a", "b", "top"}, {{"a", "top"}, {"b", "top"}});
    m.add("B", const2(m.poset));
    return m;
  }
  if (name == "crown") {
    Model m;
    m.poset = FinPoset::validate({"p", "q", "r", "s"},
                                 {{"p", "r"}, {"q", "r"}, {"p", "s"}, {"q", "s"}});
    std::map<std::pair<int, int>, std::vector<int>> swap_rp;
    swap_rp[{2, 0}] = {1, 0};
    std::vector<std::vector<std::string>> fibers(4, {"u", "v"});
    m.add("A", Presheaf::validate(m.poset, std::move(fibers), swap_rp));
    m.add("B", const2(m.poset));
    return m;
  }
  if (name == "antichain2") {
    Model m;
    m.poset = FinPoset::validate({"l", "r"}, {});
    m.add("B", const2(m.poset));
    return m;
  }
  throw InputError("unknown builtin model '" + name + "'");
}

}  // namespace

Model builtin_model(const std::string& name) { return make_builtin(name); }

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"point", "chain2", "fork", "crown", "antichain2"};
  return names;
}

}  // namespace toposlab
