#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>

#include "logicloss/parser.hpp"
#include "logicloss/rng.hpp"

using namespace logicloss;

namespace {

RuleSet parse_one(const std::string& body_line) {
  return parse_rules("labels: E, C, N\n" + body_line + "\n");
}

// Reference evaluator, written independently of eval_boolean: assignments are
// flattened into parallel vectors and looked up linearly.
bool ref_eval(const Formula& f, const std::vector<std::vector<std::string>>& tuples,
              const std::vector<Label>& predicted, const std::vector<Label>& gold) {
  const auto lookup = [&](const std::vector<std::string>& args, const std::vector<Label>& table) {
    for (std::size_t i = 0; i < tuples.size(); ++i)
      if (tuples[i] == args) return table[i];
    throw std::out_of_range("tuple not found");
  };
  switch (f.conn) {
    case Conn::Top: return true;
    case Conn::Pred: {
      const Label p = lookup(f.args, predicted);
      return f.label == kGoldLabel ? p == lookup(f.args, gold) : p == f.label;
    }
    case Conn::Not: return !ref_eval(*f.lhs, tuples, predicted, gold);
    case Conn::And:
      return ref_eval(*f.lhs, tuples, predicted, gold) && ref_eval(*f.rhs, tuples, predicted, gold);
    case Conn::Or:
      return ref_eval(*f.lhs, tuples, predicted, gold) || ref_eval(*f.rhs, tuples, predicted, gold);
    case Conn::Implies:
      return !ref_eval(*f.lhs, tuples, predicted, gold) || ref_eval(*f.rhs, tuples, predicted, gold);
    case Conn::Iff:
      return ref_eval(*f.lhs, tuples, predicted, gold) == ref_eval(*f.rhs, tuples, predicted, gold);
  }
  return false;
}

PredictionAssignment to_assignment(const std::vector<std::vector<std::string>>& tuples,
                                   const std::vector<Label>& predicted,
                                   const std::vector<Label>& gold) {
  PredictionAssignment a;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    a.predicted[tuples[i]] = predicted[i];
    if (!gold.empty()) a.gold[tuples[i]] = gold[i];
  }
  return a;
}

// Reference desugaring by plain structural recursion.
FormulaPtr ref_desugar(const FormulaPtr& f) {
  switch (f->conn) {
    case Conn::Top:
    case Conn::Pred: return f;
    case Conn::Not: return make_not(ref_desugar(f->lhs));
    case Conn::And: return make_and(ref_desugar(f->lhs), ref_desugar(f->rhs));
    case Conn::Or: return make_or(ref_desugar(f->lhs), ref_desugar(f->rhs));
    case Conn::Implies: return make_implies(ref_desugar(f->lhs), ref_desugar(f->rhs));
    case Conn::Iff: {
      const FormulaPtr a = ref_desugar(f->lhs);
      const FormulaPtr b = ref_desugar(f->rhs);
      return make_and(make_implies(a, b), make_implies(b, a));
    }
  }
  return f;
}

FormulaPtr random_formula(RandomStream& rng, int depth, bool allow_gold) {
  static const std::vector<std::vector<std::string>> tuples{
      {"P", "H"}, {"H", "P"}, {"P", "P"}, {"H", "H"}};
  if (depth <= 0 || rng.uniform() < 0.3) {
    if (rng.uniform() < 0.08) return make_top();
    const Label label =
        allow_gold && rng.uniform() < 0.15 ? kGoldLabel : rng.uniform_int(3);
    return make_pred(label, tuples[static_cast<std::size_t>(rng.uniform_int(4))]);
  }
  switch (rng.uniform_int(5)) {
    case 0: return make_not(random_formula(rng, depth - 1, allow_gold));
    case 1: return make_and(random_formula(rng, depth - 1, allow_gold),
                            random_formula(rng, depth - 1, allow_gold));
    case 2: return make_or(random_formula(rng, depth - 1, allow_gold),
                           random_formula(rng, depth - 1, allow_gold));
    case 3: return make_implies(random_formula(rng, depth - 1, allow_gold),
                                random_formula(rng, depth - 1, allow_gold));
    default: return make_iff(random_formula(rng, depth - 1, allow_gold),
                             random_formula(rng, depth - 1, allow_gold));
  }
}

// Calls fn for every assignment of labels {0,1,2} to the given tuples.
void for_all_assignments(std::size_t n, const std::function<void(const std::vector<Label>&)>& fn) {
  std::vector<Label> assignment(n, 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (std::size_t i = 0; i < n; ++i) t *= 3;
    return t;
  }();
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      assignment[i] = static_cast<Label>(c % 3);
      c /= 3;
    }
    fn(assignment);
  }
}

}  // namespace

TEST_CASE("parses the symmetry rule into the expected tree") {
  const RuleSet rs = parse_one("rule sym over (P,H): C(P,H) <-> C(H,P)");
  REQUIRE(rs.rules.size() == 1);
  const Rule& r = rs.rules[0];
  CHECK(r.name == "sym");
  CHECK(r.vars == std::vector<std::string>{"P", "H"});
  const Label c = *rs.labels.find("C");
  const FormulaPtr expected = make_iff(make_pred(c, {"P", "H"}), make_pred(c, {"H", "P"}));
  CHECK(structurally_equal(*r.body, *expected));
}

TEST_CASE("parses the annotation-form template over a single example variable") {
  const RuleSet rs = parse_rules("labels: E, C, N\nrule ann over (X): true -> E(X)\n");
  const FormulaPtr expected = make_implies(make_top(), make_pred(0, {"X"}));
  CHECK(structurally_equal(*rs.rules[0].body, *expected));
}

TEST_CASE("rejects non-implication top level") {
  CHECK_THROWS_WITH_AS(parse_one("rule bad over (P,H): C(P,H)"),
                       doctest::Contains("implication"), ParseError);
}

TEST_CASE("reports undeclared variables and labels with positions") {
  try {
    parse_one("rule r over (P,H): C(P,Z) -> C(P,H)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("undeclared variable 'Z'") != std::string::npos);
    CHECK(e.line == 2);
    CHECK(e.col > 1);
  }
  CHECK_THROWS_WITH_AS(parse_one("rule r over (P,H): Q(P,H) -> C(P,H)"),
                       doctest::Contains("undeclared label 'Q'"), ParseError);
}

TEST_CASE("rejects duplicate rule names, duplicate labels, reserved labels") {
  CHECK_THROWS_AS(parse_rules("labels: E, C, N\n"
                              "rule r over (P,H): true -> E(P,H)\n"
                              "rule r over (P,H): true -> C(P,H)\n"),
                  ParseError);
  CHECK_THROWS(parse_rules("labels: E, E\nrule r over (P): true -> E(P)\n"));
  CHECK_THROWS_AS(parse_rules("labels: E, Gold\nrule r over (P): true -> E(P)\n"), ParseError);
}

TEST_CASE("rejects mixed predicate arity within a rule set") {
  CHECK_THROWS_WITH_AS(parse_rules("labels: E, C, N\n"
                                   "rule a over (X): true -> E(X)\n"
                                   "rule b over (P,H): true -> E(P,H)\n"),
                       doctest::Contains("arities"), ParseError);
}

TEST_CASE("operator precedence and associativity") {
  // ! binds tighter than &, & tighter than |, -> associates right.
  const RuleSet rs = parse_one("rule r over (P,H): !E(P,H) & C(P,H) | N(P,H) -> C(P,H) -> E(P,H)");
  const Formula& body = *rs.rules[0].body;
  REQUIRE(body.conn == Conn::Implies);
  CHECK(body.lhs->conn == Conn::Or);
  CHECK(body.lhs->lhs->conn == Conn::And);
  CHECK(body.lhs->lhs->lhs->conn == Conn::Not);
  CHECK(body.rhs->conn == Conn::Implies);
}

TEST_CASE("comments and multi-line rules parse") {
  const RuleSet rs = parse_rules(
      "# header comment\n"
      "labels: E, C, N  # trailing comment\n"
      "rule tran over (P,H,Z):\n"
      "    (E(P,H) & E(H,Z) -> E(P,Z))\n"
      "  & (E(P,H) & C(H,Z) -> C(P,Z))\n");
  REQUIRE(rs.rules.size() == 1);
  CHECK(rs.rules[0].clauses().size() == 2);
}

TEST_CASE("the shipped rule file parses into ann, sym, tran") {
  const RuleSet rs = load_rules(std::string(LOGICLOSS_RULES_DIR) + "/nli.rules");
  REQUIRE(rs.rules.size() == 3);
  CHECK(rs.rules[0].name == "ann");
  CHECK(rs.rules[1].name == "sym");
  CHECK(rs.rules[2].name == "tran");
  CHECK(rs.rules[0].needs_gold());
  CHECK(rs.rules[2].clauses().size() == 4);
}

TEST_CASE("printer output re-parses to a structurally equal rule set") {
  const RuleSet rs = load_rules(std::string(LOGICLOSS_RULES_DIR) + "/nli.rules");
  const RuleSet reparsed = parse_rules(format_rules(rs));
  REQUIRE(reparsed.rules.size() == rs.rules.size());
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    CHECK(reparsed.rules[i].name == rs.rules[i].name);
    CHECK(structurally_equal(*reparsed.rules[i].body, *rs.rules[i].body));
  }
}

TEST_CASE("round trip holds for random formulas") {
  RandomStream rng(7);
  const LabelSet labels({"E", "C", "N"});
  for (int iter = 0; iter < 300; ++iter) {
    const FormulaPtr f = random_formula(rng, 5, true);
    const std::string text =
        "labels: E, C, N\nrule r over (P,H): true -> (" + format_formula(*f, labels) + ")\n";
    const RuleSet rs = parse_rules(text);
    CAPTURE(format_formula(*f, labels));
    CHECK(structurally_equal(*rs.rules[0].body->rhs, *f));
  }
}

TEST_CASE("desugar expands biconditionals as the reference expander does") {
  const FormulaPtr a = make_pred(0, {"P", "H"});
  const FormulaPtr b = make_pred(1, {"H", "P"});
  const FormulaPtr c = make_pred(2, {"P", "H"});

  const FormulaPtr simple = desugar(make_iff(a, b));
  CHECK(structurally_equal(*simple, *make_and(make_implies(a, b), make_implies(b, a))));

  const FormulaPtr untouched = make_pred(0, {"P", "H"});
  CHECK(desugar(untouched) == untouched);  // no biconditional: same node

  const FormulaPtr nested = make_iff(make_iff(a, b), c);
  const FormulaPtr inner = make_and(make_implies(a, b), make_implies(b, a));
  const FormulaPtr expected = make_and(make_implies(inner, c), make_implies(c, inner));
  CHECK(structurally_equal(*desugar(nested), *expected));

  RandomStream rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const FormulaPtr f = random_formula(rng, 5, false);
    CHECK(structurally_equal(*desugar(f), *ref_desugar(f)));
  }
}

TEST_CASE("desugar removes every biconditional, preserves semantics, is idempotent") {
  RandomStream rng(13);
  for (int iter = 0; iter < 150; ++iter) {
    const FormulaPtr f = random_formula(rng, 5, false);
    const FormulaPtr d = desugar(f);
    CHECK_FALSE(contains_iff(*d));
    CHECK(structurally_equal(*desugar(d), *d));

    const auto tuples = collect_arg_tuples(*f);
    if (tuples.size() > 4) continue;
    for_all_assignments(tuples.size(), [&](const std::vector<Label>& assignment) {
      const PredictionAssignment a = to_assignment(tuples, assignment, {});
      CHECK(eval_boolean(*f, a) == eval_boolean(*d, a));
    });
  }
}

TEST_CASE("eval_boolean matches the spec examples") {
  const RuleSet rs = parse_one("rule r over (P,H,Z): E(P,H) & C(H,Z) -> C(P,Z)");
  PredictionAssignment a;
  a.predicted[{"P", "H"}] = 0;  // E
  a.predicted[{"H", "Z"}] = 1;  // C
  a.predicted[{"P", "Z"}] = 2;  // N: the composition is violated
  CHECK_FALSE(eval_boolean(*rs.rules[0].body, a));

  CHECK(eval_boolean(*make_top(), PredictionAssignment{}));

  PredictionAssignment missing;
  missing.predicted[{"P", "H"}] = 0;
  CHECK_THROWS_AS(eval_boolean(*rs.rules[0].body, missing), std::out_of_range);
}

TEST_CASE("exactly one label predicate holds per tuple") {
  PredictionAssignment a;
  a.predicted[{"P", "H"}] = 1;  // C
  int holds = 0;
  for (Label l = 0; l < 3; ++l)
    holds += eval_boolean(*make_pred(l, {"P", "H"}), a) ? 1 : 0;
  CHECK(holds == 1);
}

TEST_CASE("eval_boolean agrees with the truth-table oracle on the shipped rules") {
  const RuleSet rs = load_rules(std::string(LOGICLOSS_RULES_DIR) + "/nli.rules");
  for (const Rule& rule : rs.rules) {
    const auto tuples = collect_arg_tuples(*rule.body);
    if (rule.needs_gold()) {
      // Enumerate predictions and gold labels together.
      for_all_assignments(tuples.size(), [&](const std::vector<Label>& predicted) {
        for_all_assignments(tuples.size(), [&](const std::vector<Label>& gold) {
          const PredictionAssignment a = to_assignment(tuples, predicted, gold);
          CHECK(eval_boolean(*rule.body, a) == ref_eval(*rule.body, tuples, predicted, gold));
        });
      });
    } else {
      for_all_assignments(tuples.size(), [&](const std::vector<Label>& predicted) {
        const PredictionAssignment a = to_assignment(tuples, predicted, {});
        CHECK(eval_boolean(*rule.body, a) == ref_eval(*rule.body, tuples, predicted, {}));
      });
    }
  }
}

TEST_CASE("the transitivity rule admits exactly 21 of the 27 assignments") {
  const RuleSet rs = load_rules(std::string(LOGICLOSS_RULES_DIR) + "/nli.rules");
  const Rule* tran = rs.find("tran");
  REQUIRE(tran != nullptr);
  const auto tuples = collect_arg_tuples(*tran->body);
  REQUIRE(tuples.size() == 3);
  std::set<std::vector<Label>> valid;
  for_all_assignments(3, [&](const std::vector<Label>& predicted) {
    if (eval_boolean(*tran->body, to_assignment(tuples, predicted, {})))
      valid.insert(predicted);
  });
  CHECK(valid.size() == 21);
  // The introduction's example assignment is allowed; its broken variant is not.
  CHECK(valid.count({0, 1, 1}) == 1);       // E, C -> C
  CHECK(valid.count({0, 1, 2}) == 0);       // E, C -> N violates the composition
}

TEST_CASE("random formulas agree with the truth-table oracle") {
  RandomStream rng(17);
  for (int iter = 0; iter < 150; ++iter) {
    const FormulaPtr f = random_formula(rng, 4, false);
    const auto tuples = collect_arg_tuples(*f);
    if (tuples.size() > 3) continue;
    for_all_assignments(tuples.size(), [&](const std::vector<Label>& predicted) {
      const PredictionAssignment a = to_assignment(tuples, predicted, {});
      CHECK(eval_boolean(*f, a) == ref_eval(*f, tuples, predicted, {}));
    });
  }
}
