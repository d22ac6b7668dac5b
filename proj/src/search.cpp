#include "toposlab/search.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "toposlab/errors.hpp"
#include "toposlab/typecheck.hpp"

namespace toposlab {

namespace {

// Hard limit on poset enumeration: canonicalization tries every relabeling.
constexpr int kEnumLimit = 6;

std::string stage_name(int i) { return std::string(1, static_cast<char>('a' + i)); }

/** Canonical code of a strict order matrix: the minimum over relabelings of
 *  the row-major adjacency bits. */
std::uint64_t canonical_code(int n, const std::vector<std::vector<bool>>& rel) {
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  std::uint64_t best = ~std::uint64_t{0};
  do {
    std::uint64_t code = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (rel[static_cast<size_t>(perm[static_cast<size_t>(i)])]
               [static_cast<size_t>(perm[static_cast<size_t>(j)])])
          code |= std::uint64_t{1} << (i * n + j);
    best = std::min(best, code);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void collect_base_names(const Sort& s, std::set<std::string>& out) {
  if (s.kind == Sort::Kind::Base) out.insert(s.base);
  for (const Sort& a : s.args) collect_base_names(a, out);
}

void collect_base_names(const Formula& f, std::set<std::string>& out) {
  if (f.kind == Formula::Kind::Forall || f.kind == Formula::Kind::Exists)
    collect_base_names(f.sort, out);
  for (const Formula& k : f.kids) collect_base_names(k, out);
}

std::string sort_line(const std::string& name, const Presheaf& p) {
  std::ostringstream out;
  out << name << ":";
  for (int q = 0; q < p.poset().size(); ++q)
    out << " " << p.poset().element(q) << "=" << p.fiber_size(q);
  return out.str();
}

}  // namespace

std::vector<FinPoset> enumerate_posets(int max_elements, const Caps& caps) {
  if (max_elements < 1) throw InputError("poset enumeration needs a positive bound");
  if (max_elements > caps.max_poset_elements || max_elements > kEnumLimit)
    throw CapExceeded("poset enumeration bound " + std::to_string(max_elements) +
                      " exceeds the limit of " +
                      std::to_string(std::min<int>(caps.max_poset_elements, kEnumLimit)));
  std::vector<FinPoset> out;
  for (int n = 1; n <= max_elements; ++n) {
    // Strict orders compatible with the integer order cover every poset up
    // to isomorphism; the canonical code collapses relabelings.
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    std::set<std::uint64_t> codes;
    for (std::uint32_t bits = 0; bits < (1u << slots.size()); ++bits) {
      std::vector<std::vector<bool>> rel(static_cast<size_t>(n),
                                         std::vector<bool>(static_cast<size_t>(n), false));
      for (size_t k = 0; k < slots.size(); ++k)
        if ((bits >> k) & 1u)
          rel[static_cast<size_t>(slots[k].first)][static_cast<size_t>(slots[k].second)] = true;
      bool transitive = true;
      for (int i = 0; i < n && transitive; ++i)
        for (int j = i + 1; j < n && transitive; ++j)
          for (int k = j + 1; k < n && transitive; ++k)
            if (rel[static_cast<size_t>(i)][static_cast<size_t>(j)] &&
                rel[static_cast<size_t>(j)][static_cast<size_t>(k)] &&
                !rel[static_cast<size_t>(i)][static_cast<size_t>(k)])
              transitive = false;
      if (!transitive) continue;
      codes.insert(canonical_code(n, rel));
    }
    for (std::uint64_t code : codes) {
      std::vector<std::string> names;
      for (int i = 0; i < n; ++i) names.push_back(stage_name(i));
      std::vector<std::pair<std::string, std::string>> pairs;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if ((code >> (i * n + j)) & 1u) pairs.emplace_back(stage_name(i), stage_name(j));
      out.push_back(FinPoset::validate(names, pairs, caps));
    }
  }
  return out;
}

std::vector<Presheaf> enumerate_presheaves(const FinPoset& poset, int max_fiber,
                                           const Caps& caps) {
  if (max_fiber < 0) throw InputError("presheaf enumeration needs a nonnegative fiber bound");
  if (max_fiber > caps.max_fiber)
    throw CapExceeded("presheaf fiber bound " + std::to_string(max_fiber) +
                      " exceeds the cap of " + std::to_string(caps.max_fiber));
  const int n = poset.size();
  // Covering pairs (p, q): q < p with nothing in between.
  std::vector<std::pair<int, int>> covers;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (q == p || !poset.leq(q, p)) continue;
      bool direct = true;
      for (int r = 0; r < n && direct; ++r)
        if (r != p && r != q && poset.leq(q, r) && poset.leq(r, p)) direct = false;
      if (direct) covers.emplace_back(p, q);
    }

  std::vector<Presheaf> out;
  std::vector<int> sizes(static_cast<size_t>(n), 0);
  while (true) {
    bool shape_ok = true;
    for (const auto& [p, q] : covers)
      if (sizes[static_cast<size_t>(p)] > 0 && sizes[static_cast<size_t>(q)] == 0)
        shape_ok = false;
    if (shape_ok) {
      std::vector<std::vector<std::string>> fibers(static_cast<size_t>(n));
      for (int p = 0; p < n; ++p)
        for (int x = 0; x < sizes[static_cast<size_t>(p)]; ++x)
          fibers[static_cast<size_t>(p)].push_back("x" + std::to_string(x));

      // One table per covering pair, swept odometer style (last pair least
      // significant); longer restrictions come from composing covers.
      std::vector<std::vector<int>> edge(covers.size());
      long long assignments = 1;
      for (size_t e = 0; e < covers.size(); ++e) {
        int sp = sizes[static_cast<size_t>(covers[e].first)];
        int sq = sizes[static_cast<size_t>(covers[e].second)];
        edge[e].assign(static_cast<size_t>(sp), 0);
        for (int i = 0; i < sp; ++i) {
          assignments *= sq;
          if (assignments > caps.max_hom)
            throw CapExceeded("presheaf table enumeration exceeds the cap");
        }
      }
      while (true) {
        // Compose tables down every chain of covers; bail out when two
        // chains between the same stages disagree.
        std::map<std::pair<int, int>, std::vector<int>> tables;
        bool consistent = true;
        for (int p : poset.ascending()) {
          for (int q = 0; q < n && consistent; ++q) {
            if (q == p || !poset.leq(q, p)) continue;
            bool have = false;
            std::vector<int> table;
            for (size_t e = 0; e < covers.size(); ++e) {
              if (covers[e].first != p) continue;
              int c = covers[e].second;
              if (!poset.leq(q, c)) continue;
              std::vector<int> via = edge[e];
              if (c != q) {
                const std::vector<int>& rest = tables.at({c, q});
                for (int& v : via) v = rest[static_cast<size_t>(v)];
              }
              if (!have) {
                table = std::move(via);
                have = true;
              } else if (table != via) {
                consistent = false;
              }
            }
            tables[{p, q}] = std::move(table);
          }
          if (!consistent) break;
        }
        if (consistent) {
          if (static_cast<long long>(out.size()) >= caps.max_hom)
            throw CapExceeded("presheaf enumeration exceeds the cap");
          out.push_back(Presheaf::validate(poset, fibers, tables, caps));
        }
        // advance the odometer
        size_t e = covers.size();
        bool done = true;
        while (e-- > 0) {
          int sq = sizes[static_cast<size_t>(covers[e].second)];
          size_t i = edge[e].size();
          bool carried = true;
          while (i-- > 0) {
            if (++edge[e][i] < sq) {
              carried = false;
              break;
            }
            edge[e][i] = 0;
          }
          if (!carried) {
            done = false;
            break;
          }
        }
        if (done) break;
      }
    }
    // advance fiber sizes (last stage least significant)
    size_t p = sizes.size();
    bool done = true;
    while (p-- > 0) {
      if (++sizes[p] <= max_fiber) {
        done = false;
        break;
      }
      sizes[p] = 0;
    }
    if (done) break;
  }
  return out;
}

namespace {

/** Sweeps every model on one poset; stops after the first hit when asked. */
SearchResult run_shard(const FinPoset& poset, const std::vector<std::string>& names,
                       const Formula& sentence, const std::string& sentence_text,
                       const SearchBounds& bounds) {
  SearchResult out;
  std::vector<Presheaf> choices;
  if (!names.empty())
    choices = enumerate_presheaves(poset, bounds.max_fiber, bounds.opts.caps);
  std::vector<size_t> pick(names.size(), 0);
  while (true) {
    Model m;
    m.poset = poset;
    for (size_t k = 0; k < names.size(); ++k) m.add(names[k], choices[pick[k]]);
    TypedSentence sen = typecheck(sentence, m);
    Evaluator ev(m, bounds.opts);
    DownSet truth = ev.truth_value(sen);
    ++out.models_scanned;
    if (!truth.is_top()) {
      Report r;
      r.scenario = "search";
      r.poset = poset_summary(poset);
      for (size_t k = 0; k < names.size(); ++k)
        r.sorts.push_back(sort_line(names[k], choices[pick[k]]));
      r.sentence = sentence_text;
      r.truth = truth;
      r.verdict = Verdict::FailsAt;
      for (int p = 0; p < poset.size(); ++p)
        if (!truth.contains(p)) r.fails_at.push_back(poset.element(p));
      std::istringstream lines(model_to_text(m));
      std::string line;
      bool past_poset = false;
      while (std::getline(lines, line)) {
        if (line.rfind("presheaf", 0) == 0) past_poset = true;
        if (past_poset && !line.empty()) r.witnesses.push_back(line);
      }
      r.stats = ev.stats();
      out.hits.push_back({std::move(m), std::move(r)});
      if (bounds.first_only) return out;
    }
    // advance the model odometer (last sort least significant)
    size_t k = pick.size();
    bool done = true;
    while (k-- > 0) {
      if (++pick[k] < choices.size()) {
        done = false;
        break;
      }
      pick[k] = 0;
    }
    if (done) break;
  }
  return out;
}

}  // namespace

SearchResult search_counterexample(const Formula& sentence, const SearchBounds& bounds) {
  const Caps& caps = bounds.opts.caps;
  if (bounds.max_fiber > caps.max_fiber)
    throw CapExceeded("search fiber bound exceeds the cap of " +
                      std::to_string(caps.max_fiber));
  std::set<std::string> name_set;
  collect_base_names(sentence, name_set);
  std::vector<std::string> names(name_set.begin(), name_set.end());
  const std::string sentence_text = formula_to_string(sentence);
  std::vector<FinPoset> posets = enumerate_posets(bounds.max_poset, caps);

  std::vector<SearchResult> shards(posets.size());
  int jobs = bounds.first_only ? 1 : std::max(1, bounds.jobs);
  if (jobs <= 1) {
    for (size_t i = 0; i < posets.size(); ++i) {
      shards[i] = run_shard(posets[i], names, sentence, sentence_text, bounds);
      if (bounds.first_only && !shards[i].hits.empty()) break;
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(posets.size());
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < posets.size(); i = next.fetch_add(1)) {
        try {
          shards[i] = run_shard(posets[i], names, sentence, sentence_text, bounds);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(jobs, static_cast<int>(posets.size())); ++t)
      pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SearchResult out;
  for (SearchResult& s : shards) {
    out.models_scanned += s.models_scanned;
    for (SearchHit& h : s.hits) out.hits.push_back(std::move(h));
  }
  return out;
}

}  // namespace toposlab
