#include "logicloss/formula.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace logicloss {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("label set must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::invalid_argument("empty label name");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate label: " + n);
  }
}

std::optional<Label> LabelSet::find(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[static_cast<std::size_t>(i)] == name) return i;
  }
  return std::nullopt;
}

namespace {

FormulaPtr node(Conn c, FormulaPtr lhs = nullptr, FormulaPtr rhs = nullptr) {
  auto f = std::make_shared<Formula>();
  f->conn = c;
  f->lhs = std::move(lhs);
  f->rhs = std::move(rhs);
  return f;
}

}  // namespace

FormulaPtr make_top() { return node(Conn::Top); }

FormulaPtr make_pred(Label label, std::vector<std::string> args) {
  auto f = std::make_shared<Formula>();
  f->conn = Conn::Pred;
  f->label = label;
  f->args = std::move(args);
  if (f->args.empty()) throw std::invalid_argument("predicate needs at least one argument");
  return f;
}

FormulaPtr make_not(FormulaPtr f) { return node(Conn::Not, std::move(f)); }
FormulaPtr make_and(FormulaPtr a, FormulaPtr b) { return node(Conn::And, std::move(a), std::move(b)); }
FormulaPtr make_or(FormulaPtr a, FormulaPtr b) { return node(Conn::Or, std::move(a), std::move(b)); }
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) { return node(Conn::Implies, std::move(a), std::move(b)); }
FormulaPtr make_iff(FormulaPtr a, FormulaPtr b) { return node(Conn::Iff, std::move(a), std::move(b)); }

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.conn != b.conn) return false;
  switch (a.conn) {
    case Conn::Top:
      return true;
    case Conn::Pred:
      return a.label == b.label && a.args == b.args;
    case Conn::Not:
      return structurally_equal(*a.lhs, *b.lhs);
    default:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

FormulaPtr desugar(const FormulaPtr& f) {
  switch (f->conn) {
    case Conn::Top:
    case Conn::Pred:
      return f;
    case Conn::Not: {
      auto c = desugar(f->lhs);
      return c == f->lhs ? f : make_not(c);
    }
    case Conn::Iff: {
      auto a = desugar(f->lhs);
      auto b = desugar(f->rhs);
      return make_and(make_implies(a, b), make_implies(b, a));
    }
    default: {
      auto a = desugar(f->lhs);
      auto b = desugar(f->rhs);
      if (a == f->lhs && b == f->rhs) return f;
      return node(f->conn, std::move(a), std::move(b));
    }
  }
}

bool contains_iff(const Formula& f) {
  switch (f.conn) {
    case Conn::Top:
    case Conn::Pred:
      return false;
    case Conn::Iff:
      return true;
    case Conn::Not:
      return contains_iff(*f.lhs);
    default:
      return contains_iff(*f.lhs) || contains_iff(*f.rhs);
  }
}

namespace {

std::string tuple_text(const std::vector<std::string>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += args[i];
  }
  s += ")";
  return s;
}

}  // namespace

bool eval_boolean(const Formula& f, const PredictionAssignment& a) {
  switch (f.conn) {
    case Conn::Top:
      return true;
    case Conn::Pred: {
      auto it = a.predicted.find(f.args);
      if (it == a.predicted.end())
        throw std::out_of_range("no prediction for tuple " + tuple_text(f.args));
      if (f.label == kGoldLabel) {
        auto g = a.gold.find(f.args);
        if (g == a.gold.end())
          throw std::out_of_range("no gold annotation for tuple " + tuple_text(f.args));
        return it->second == g->second;
      }
      return it->second == f.label;
    }
    case Conn::Not:
      return !eval_boolean(*f.lhs, a);
    case Conn::And:
      return eval_boolean(*f.lhs, a) && eval_boolean(*f.rhs, a);
    case Conn::Or:
      return eval_boolean(*f.lhs, a) || eval_boolean(*f.rhs, a);
    case Conn::Implies:
      return !eval_boolean(*f.lhs, a) || eval_boolean(*f.rhs, a);
    case Conn::Iff:
      return eval_boolean(*f.lhs, a) == eval_boolean(*f.rhs, a);
  }
  throw std::logic_error("unreachable connective");
}

bool is_implication_form(const Formula& f) {
  switch (f.conn) {
    case Conn::Implies:
    case Conn::Iff:
      return true;
    case Conn::And:
      return is_implication_form(*f.lhs) && is_implication_form(*f.rhs);
    default:
      return false;
  }
}

namespace {

void collect_clauses(const FormulaPtr& f,
                     std::vector<std::pair<FormulaPtr, FormulaPtr>>& out) {
  if (f->conn == Conn::And) {
    collect_clauses(f->lhs, out);
    collect_clauses(f->rhs, out);
    return;
  }
  if (f->conn != Conn::Implies)
    throw std::logic_error("rule body is not in implication form");
  out.emplace_back(f->lhs, f->rhs);
}

bool has_gold_atom(const Formula& f) {
  switch (f.conn) {
    case Conn::Top:
      return false;
    case Conn::Pred:
      return f.label == kGoldLabel;
    case Conn::Not:
      return has_gold_atom(*f.lhs);
    default:
      return has_gold_atom(*f.lhs) || has_gold_atom(*f.rhs);
  }
}

}  // namespace

std::vector<std::pair<FormulaPtr, FormulaPtr>> Rule::clauses() const {
  std::vector<std::pair<FormulaPtr, FormulaPtr>> out;
  collect_clauses(desugar(body), out);
  return out;
}

bool Rule::needs_gold() const { return has_gold_atom(*body); }

const Rule* RuleSet::find(std::string_view name) const {
  for (const auto& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void collect_arg_tuples_into(const Formula& f,
                             std::vector<std::vector<std::string>>& out) {
  switch (f.conn) {
    case Conn::Top:
      return;
    case Conn::Pred: {
      if (std::find(out.begin(), out.end(), f.args) == out.end()) out.push_back(f.args);
      return;
    }
    case Conn::Not:
      collect_arg_tuples_into(*f.lhs, out);
      return;
    default:
      collect_arg_tuples_into(*f.lhs, out);
      collect_arg_tuples_into(*f.rhs, out);
      return;
  }
}

std::vector<std::vector<std::string>> collect_arg_tuples(const Formula& f) {
  std::vector<std::vector<std::string>> out;
  collect_arg_tuples_into(f, out);
  return out;
}

namespace {

// Precedence levels used by both the parser and the printer:
// <-> is 1, -> is 2 (both right-associative), | is 3, & is 4 (both
// left-associative), ! is 5, atoms are 6.
int precedence(Conn c) {
  switch (c) {
    case Conn::Iff:
      return 1;
    case Conn::Implies:
      return 2;
    case Conn::Or:
      return 3;
    case Conn::And:
      return 4;
    case Conn::Not:
      return 5;
    default:
      return 6;
  }
}

void print(const Formula& f, const LabelSet& labels, int min_prec, std::string& out) {
  const int p = precedence(f.conn);
  const bool parens = p < min_prec;
  if (parens) out += "(";
  switch (f.conn) {
    case Conn::Top:
      out += "true";
      break;
    case Conn::Pred:
      out += f.label == kGoldLabel ? "Gold" : labels.name(f.label);
      out += tuple_text(f.args);
      break;
    case Conn::Not:
      out += "!";
      print(*f.lhs, labels, p, out);
      break;
    case Conn::And:
    case Conn::Or:
      print(*f.lhs, labels, p, out);
      out += f.conn == Conn::And ? " & " : " | ";
      print(*f.rhs, labels, p + 1, out);
      break;
    case Conn::Implies:
    case Conn::Iff:
      print(*f.lhs, labels, p + 1, out);
      out += f.conn == Conn::Implies ? " -> " : " <-> ";
      print(*f.rhs, labels, p, out);
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string format_formula(const Formula& f, const LabelSet& labels) {
  std::string out;
  print(f, labels, 0, out);
  return out;
}

std::string format_rule(const Rule& r, const LabelSet& labels) {
  std::string out = "rule " + r.name + " over " + tuple_text(r.vars) + ": ";
  out += format_formula(*r.body, labels);
  return out;
}

std::string format_rules(const RuleSet& rs) {
  std::string out = "labels: ";
  for (int i = 0; i < rs.labels.size(); ++i) {
    if (i) out += ", ";
    out += rs.labels.name(i);
  }
  out += "\n";
  for (const auto& r : rs.rules) {
    out += format_rule(r, rs.labels);
    out += "\n";
  }
  return out;
}

}  // namespace logicloss
