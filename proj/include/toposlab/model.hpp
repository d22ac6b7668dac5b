#pragma once

#include <string>
#include <utility>
#include <vector>

#include "toposlab/caps.hpp"
#include "toposlab/poset.hpp"
#include "toposlab/presheaf.hpp"

namespace toposlab {

/** A base poset together with named presheaves interpreting base sorts. */
struct Model {
  FinPoset poset;
  std::vector<std::pair<std::string, Presheaf>> sorts;  // declaration order

  const Presheaf* find(const std::string& name) const;
  /** Throws UnknownBaseSort when absent. */
  const Presheaf& at(const std::string& name) const;
  Model& add(std::string name, Presheaf p);
};

/** Parses the line-oriented model format:
 *    poset: a b c
 *    leq: a <= c
 *    presheaf B:
 *    stage a { x y }
 *    map c -> a : x => y
 *  '#' starts a comment. Every stage of every presheaf must be declared;
 *  (p,q) pairs with no map lines fall back to identity on shared names. */
Model parse_model(const std::string& text, const Caps& caps = {});

/** Renders a model back into the file format; identity tables are omitted. */
std::string model_to_text(const Model& m);

/** Fixture models compiled into the library:
 *    point       one stage; B = {x,y}
 *    chain2      bot <= top; B constant {x,y}; X collapses {x,y} to {x}
 *    fork        a,b <= top; B constant {x,y}
 *    crown       p,q <= r and p,q <= s; B constant {x,y};
 *                A = {u,v} with the r -> p restriction swapping them
 *    antichain2  two incomparable stages; B constant {x,y}
 *  Throws InputError on unknown names. */
Model builtin_model(const std::string& name);
const std::vector<std::string>& builtin_model_names();

}  // namespace toposlab
