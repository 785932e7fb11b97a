#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "logicloss/formula.hpp"

namespace logicloss {

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Parses a rule file:
//
//   # comment
//   labels: E, C, N
//   rule sym over (P,H): C(P,H) <-> C(H,P)
//
// Operators: ! & | -> <->  with precedence ! > & > | > -> > <-> ;
// -> and <-> associate to the right, & and | to the left. `true` is the
// only literal. `Gold` is a reserved predicate naming the example's
// annotated label. Every rule body must be an implication, a biconditional,
// or a conjunction of such. Parsing is total and deterministic and
// round-trips through format_rules.
RuleSet parse_rules(std::string_view text);

RuleSet load_rules(const std::string& path);

}  // namespace logicloss
