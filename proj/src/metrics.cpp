#include "logicloss/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace logicloss {

namespace {

// Maps a rule's variables onto a collection's slots by position and resolves
// every predicate argument tuple to a canonical feature tuple index. Returns
// false if the collection lacks a needed tuple or gold label.
struct RuleBinding {
  std::vector<std::vector<std::string>> arg_tuples;  // as written in the rule
  std::vector<int> tuple_index;                      // canonical index per arg tuple
};

bool bind_rule(const Rule& rule, const ExampleCollection& col, RuleBinding& out) {
  if (static_cast<int>(rule.vars.size()) != slot_count(col.kind)) return false;
  std::map<std::string, int> var_slot;
  for (std::size_t i = 0; i < rule.vars.size(); ++i)
    var_slot[rule.vars[i]] = static_cast<int>(i);
  const auto& canon = canonical_tuples(col.kind);
  out.arg_tuples = collect_arg_tuples(*rule.body);
  out.tuple_index.clear();
  for (const auto& args : out.arg_tuples) {
    std::vector<int> slots;
    slots.reserve(args.size());
    for (const auto& v : args) slots.push_back(var_slot.at(v));
    int found = -1;
    for (std::size_t k = 0; k < canon.size(); ++k) {
      if (canon[k] == slots) {
        found = static_cast<int>(k);
        break;
      }
    }
    if (found < 0) return false;  // collection carries no features for this tuple
    out.tuple_index.push_back(found);
  }
  if (rule.needs_gold()) {
    // Gold atoms only bind where an annotation exists.
    for (std::size_t i = 0; i < out.arg_tuples.size(); ++i) {
      if (!col.has_gold(out.tuple_index[i])) return false;
    }
  }
  return true;
}

// Per-collection cache of hard predictions, one per canonical tuple.
std::vector<Label> predict_tuples(const ExampleCollection& col, const PredictFn& predict) {
  std::vector<Label> out;
  out.reserve(col.features.size());
  for (const auto& f : col.features) out.push_back(predict(f));
  return out;
}

void validate(const ViolationReport& r) {
  if (r.numerator > r.global_denominator || r.numerator > r.conditional_denominator)
    throw std::logic_error("violation numerator exceeds a denominator");
  if (r.tau && r.rho > *r.tau + 1e-15)
    throw std::logic_error("rho exceeds tau");
  long long per_rule_sum = 0;
  for (const auto& s : r.per_rule) per_rule_sum += s.violated;
  if (r.numerator > per_rule_sum)
    throw std::logic_error("combined violations exceed per-rule total");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ViolationReport violations(const Dataset& ds, const RuleSet& rs, const PredictFn& predict) {
  ViolationReport report;
  report.global_denominator = static_cast<long long>(ds.size());
  report.per_rule.reserve(rs.rules.size());
  for (const auto& rule : rs.rules) report.per_rule.push_back(RuleStats{rule.name});

  for (const auto& col : ds.items) {
    const std::vector<Label> tuple_pred = predict_tuples(col, predict);
    bool any_violated = false;
    bool any_active = false;
    for (std::size_t ri = 0; ri < rs.rules.size(); ++ri) {
      const Rule& rule = rs.rules[ri];
      RuleBinding binding;
      if (!bind_rule(rule, col, binding)) continue;
      RuleStats& stats = report.per_rule[ri];
      ++stats.applicable;

      PredictionAssignment assignment;
      for (std::size_t i = 0; i < binding.arg_tuples.size(); ++i) {
        const int k = binding.tuple_index[i];
        assignment.predicted[binding.arg_tuples[i]] = tuple_pred[static_cast<std::size_t>(k)];
        if (col.has_gold(k)) assignment.gold[binding.arg_tuples[i]] = col.gold[static_cast<std::size_t>(k)];
      }
      bool rule_violated = false;
      bool rule_active = false;
      for (const auto& [antecedent, consequent] : rule.clauses()) {
        const bool l = eval_boolean(*antecedent, assignment);
        if (!l) continue;
        rule_active = true;
        if (!eval_boolean(*consequent, assignment)) rule_violated = true;
      }
      if (rule_violated) ++stats.violated;
      if (rule_active) ++stats.antecedent_active;
      any_violated = any_violated || rule_violated;
      any_active = any_active || rule_active;
    }
    if (any_violated) ++report.numerator;
    if (any_active) ++report.conditional_denominator;

    // Accuracy over every gold-bearing tuple.
    for (std::size_t k = 0; k < col.gold.size(); ++k) {
      if (col.gold[k] < 0) continue;
      ++report.labeled_tuples;
      if (tuple_pred[k] == col.gold[k]) ++report.correct_tuples;
    }
  }

  report.rho = report.global_denominator > 0
                   ? static_cast<double>(report.numerator) /
                         static_cast<double>(report.global_denominator)
                   : 0.0;
  if (report.conditional_denominator > 0)
    report.tau = static_cast<double>(report.numerator) /
                 static_cast<double>(report.conditional_denominator);
  for (auto& stats : report.per_rule) {
    stats.rho = stats.applicable > 0
                    ? static_cast<double>(stats.violated) / static_cast<double>(stats.applicable)
                    : 0.0;
    if (stats.antecedent_active > 0)
      stats.tau = static_cast<double>(stats.violated) /
                  static_cast<double>(stats.antecedent_active);
  }
  if (report.labeled_tuples > 0)
    report.accuracy = static_cast<double>(report.correct_tuples) /
                      static_cast<double>(report.labeled_tuples);
  validate(report);
  return report;
}

ViolationReport violations(const Dataset& ds, const RuleSet& rs, const ModelParams& model) {
  if (!(model.labels == rs.labels))
    throw std::invalid_argument("rule file and model disagree on the label vocabulary");
  return violations(ds, rs, [&model](std::span<const double> x) {
    return predict_label(model, x);
  });
}

ViolationReport global_violation(const Dataset& ds, const RuleSet& rs, const ModelParams& model) {
  return violations(ds, rs, model);
}

ViolationReport conditional_violation(const Dataset& ds, const RuleSet& rs,
                                      const ModelParams& model) {
  return violations(ds, rs, model);
}

CoverageReport coverage(const Dataset& ds, const CompiledLoss& compiled,
                        const ModelParams& model) {
  if (!(model.labels == compiled.labels()))
    throw std::invalid_argument("compiled loss and model disagree on the label vocabulary");
  const std::vector<std::string>& vars = compiled.vars();
  std::map<std::string, int> var_slot;
  for (std::size_t i = 0; i < vars.size(); ++i) var_slot[vars[i]] = static_cast<int>(i);

  CoverageReport report;
  for (const auto& col : ds.items) {
    if (static_cast<int>(vars.size()) != slot_count(col.kind))
      throw std::invalid_argument("collection arity does not match compiled rule '" +
                                  compiled.rule_name() + "'");
    const auto& canon = canonical_tuples(col.kind);
    SlotValues values;
    bool applicable = true;
    for (const auto& args : compiled.arg_tuples()) {
      std::vector<int> slots;
      slots.reserve(args.size());
      for (const auto& v : args) slots.push_back(var_slot.at(v));
      int found = -1;
      for (std::size_t k = 0; k < canon.size(); ++k) {
        if (canon[k] == slots) {
          found = static_cast<int>(k);
          break;
        }
      }
      if (found < 0)
        throw std::invalid_argument("collection carries no features for a tuple of rule '" +
                                    compiled.rule_name() + "'");
      values.probs[args] = predict_proba(model, col.features[static_cast<std::size_t>(found)]);
      if (col.has_gold(found)) values.gold[args] = col.gold[static_cast<std::size_t>(found)];
      if (compiled.needs_gold() && !col.has_gold(found)) applicable = false;
    }
    if (!applicable) continue;
    ++report.total;
    if (compiled.loss(values) > 0.0) ++report.positive;
  }
  report.fraction = report.total > 0
                        ? static_cast<double>(report.positive) / static_cast<double>(report.total)
                        : 0.0;
  return report;
}

CrossTable cross_table(const Dataset& pairs, const LabelSet& labels, const PredictFn& predict) {
  CrossTable table;
  table.labels = labels;
  const int l = labels.size();
  table.counts.assign(static_cast<std::size_t>(l * l), 0);
  for (const auto& col : pairs.items) {
    if (col.kind != CollectionKind::Pair)
      throw std::invalid_argument("cross_table expects a pair dataset");
    const Label fwd = predict(col.features[0]);
    const Label bwd = predict(col.features[1]);
    ++table.counts[static_cast<std::size_t>(fwd * l + bwd)];
  }
  return table;
}

CrossTable cross_table(const Dataset& pairs, const ModelParams& model) {
  return cross_table(pairs, model.labels, [&model](std::span<const double> x) {
    return predict_label(model, x);
  });
}

CrossTable triple_marginals(const Dataset& triples, const ModelParams& model) {
  CrossTable table;
  table.labels = model.labels;
  const int l = model.labels.size();
  table.counts.assign(static_cast<std::size_t>(l * l), 0);
  table.slot_marginals.assign(canonical_tuples(CollectionKind::Triple).size(),
                              std::vector<long long>(static_cast<std::size_t>(l), 0));
  for (const auto& col : triples.items) {
    if (col.kind != CollectionKind::Triple)
      throw std::invalid_argument("triple_marginals expects a triple dataset");
    for (std::size_t k = 0; k < col.features.size(); ++k) {
      const Label p = predict_label(model, col.features[k]);
      ++table.slot_marginals[k][static_cast<std::size_t>(p)];
    }
  }
  return table;
}

long long CrossTable::at(Label row, Label col) const {
  return counts[static_cast<std::size_t>(row * labels.size() + col)];
}

std::string format_report(const ViolationReport& report) {
  std::ostringstream ss;
  ss << "collections            " << report.global_denominator << "\n";
  ss << "violated               " << report.numerator << "\n";
  ss << "antecedent active      " << report.conditional_denominator << "\n";
  ss << "rho                    " << format_double(report.rho) << "\n";
  ss << "tau                    " << (report.tau ? format_double(*report.tau) : "-") << "\n";
  if (report.accuracy)
    ss << "accuracy               " << format_double(*report.accuracy) << "\n";
  for (const auto& s : report.per_rule) {
    ss << "rule " << s.rule << ": applicable=" << s.applicable << " violated=" << s.violated
       << " active=" << s.antecedent_active << " rho=" << format_double(s.rho)
       << " tau=" << (s.tau ? format_double(*s.tau) : "-") << "\n";
  }
  return ss.str();
}

std::string format_cross_table(const CrossTable& table) {
  std::ostringstream ss;
  const int l = table.labels.size();
  if (!table.slot_marginals.empty()) {
    ss << "per-slot prediction marginals (pair slots in order)\n";
    for (std::size_t k = 0; k < table.slot_marginals.size(); ++k) {
      ss << "slot " << k << ":";
      for (int i = 0; i < l; ++i)
        ss << " " << table.labels.name(i) << "=" << table.slot_marginals[k][static_cast<std::size_t>(i)];
      ss << "\n";
    }
    return ss.str();
  }
  ss << "rows: prediction on (P,H); columns: prediction on (H,P)\n";
  ss << "     ";
  for (int j = 0; j < l; ++j) ss << "\t" << table.labels.name(j);
  ss << "\n";
  for (int i = 0; i < l; ++i) {
    ss << table.labels.name(i);
    for (int j = 0; j < l; ++j) ss << "\t" << table.at(i, j);
    ss << "\n";
  }
  return ss.str();
}

std::string format_key_values(const ViolationReport& report) {
  std::ostringstream ss;
  ss << "collections=" << report.global_denominator << "\n";
  ss << "violated=" << report.numerator << "\n";
  ss << "rho=" << format_double(report.rho) << "\n";
  if (report.tau) ss << "tau=" << format_double(*report.tau) << "\n";
  if (report.accuracy) ss << "accuracy=" << format_double(*report.accuracy) << "\n";
  for (const auto& s : report.per_rule) {
    ss << "rho_" << s.rule << "=" << format_double(s.rho) << "\n";
    if (s.tau) ss << "tau_" << s.rule << "=" << format_double(*s.tau) << "\n";
  }
  return ss.str();
}

}  // namespace logicloss
