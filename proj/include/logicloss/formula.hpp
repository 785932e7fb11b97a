#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "logicloss/labels.hpp"

namespace logicloss {

enum class Conn { Top, Pred, Not, And, Or, Implies, Iff };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable formula tree over label predicates applied to tuples of example
// variables. Evaluation is read-only, so sharing subtrees across threads is
// safe.
struct Formula {
  Conn conn;
  Label label = -2;               // Pred only; kGoldLabel for gold-agreement atoms
  std::vector<std::string> args;  // Pred only
  FormulaPtr lhs, rhs;            // Not uses lhs only
};

FormulaPtr make_top();
FormulaPtr make_pred(Label label, std::vector<std::string> args);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr make_iff(FormulaPtr a, FormulaPtr b);

bool structurally_equal(const Formula& a, const Formula& b);

// Eliminates every biconditional bottom-up:
// Iff(a, b) -> And(Implies(a, b), Implies(b, a)). Idempotent.
FormulaPtr desugar(const FormulaPtr& f);

bool contains_iff(const Formula& f);

// Hard model decisions for the argument tuples a formula mentions, plus gold
// labels where an annotation exists.
struct PredictionAssignment {
  std::map<std::vector<std::string>, Label> predicted;
  std::map<std::vector<std::string>, Label> gold;
};

// Two-valued semantics. Pred(l, args) is true iff the assignment maps args to
// l; a gold atom is true iff the prediction equals the gold label. Throws if
// a needed entry is missing.
bool eval_boolean(const Formula& f, const PredictionAssignment& a);

// A named consistency statement over one tuple of example variables. The body
// must be in implication form: an implication, a biconditional, or a
// conjunction of such (a biconditional is two implications).
struct Rule {
  std::string name;
  std::vector<std::string> vars;
  FormulaPtr body;

  // The desugared implication clauses (antecedent, consequent) of the body.
  std::vector<std::pair<FormulaPtr, FormulaPtr>> clauses() const;
  // True if any atom refers to a gold annotation.
  bool needs_gold() const;
};

bool is_implication_form(const Formula& f);

struct RuleSet {
  LabelSet labels;
  std::vector<Rule> rules;

  const Rule* find(std::string_view name) const;
};

// Distinct predicate argument tuples in depth-first, left-to-right
// first-occurrence order.
std::vector<std::vector<std::string>> collect_arg_tuples(const Formula& f);

// Pretty printer; output re-parses to a structurally equal formula.
std::string format_formula(const Formula& f, const LabelSet& labels);
std::string format_rule(const Rule& r, const LabelSet& labels);
std::string format_rules(const RuleSet& rs);

}  // namespace logicloss
