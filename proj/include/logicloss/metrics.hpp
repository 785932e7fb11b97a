#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logicloss/classifier.hpp"
#include "logicloss/compile.hpp"
#include "logicloss/data.hpp"
#include "logicloss/formula.hpp"

namespace logicloss {

// Hard decision for one feature vector; metrics are pure functions of these
// predictions and the rules, so recomputation is bit-identical.
using PredictFn = std::function<Label(std::span<const double>)>;

struct RuleStats {
  std::string rule;
  long long violated = 0;           // collections where some clause fails
  long long antecedent_active = 0;  // collections where some antecedent holds
  long long applicable = 0;         // collections the rule ranges over
  double rho = 0.0;
  std::optional<double> tau;
};

// Global violation rho = violated / |D|; conditional violation tau divides by
// the number of collections where any antecedent holds instead, and is absent
// when that denominator is zero. rho <= tau whenever tau is defined.
struct ViolationReport {
  long long numerator = 0;
  long long global_denominator = 0;       // |D|
  long long conditional_denominator = 0;  // collections with a live antecedent
  double rho = 0.0;
  std::optional<double> tau;
  std::vector<RuleStats> per_rule;
  std::optional<double> accuracy;  // over gold-bearing tuples, when any exist
  long long labeled_tuples = 0;
  long long correct_tuples = 0;
};

ViolationReport violations(const Dataset& ds, const RuleSet& rs, const PredictFn& predict);
ViolationReport violations(const Dataset& ds, const RuleSet& rs, const ModelParams& model);

// The two metric views share one computation; both entry points return the
// full report.
ViolationReport global_violation(const Dataset& ds, const RuleSet& rs, const ModelParams& model);
ViolationReport conditional_violation(const Dataset& ds, const RuleSet& rs,
                                      const ModelParams& model);

// Fraction of applicable collections whose compiled loss is strictly
// positive.
struct CoverageReport {
  long long positive = 0;
  long long total = 0;
  double fraction = 0.0;
};

CoverageReport coverage(const Dataset& ds, const CompiledLoss& compiled, const ModelParams& model);

// For a pair dataset: counts of (prediction on (P,H), prediction on (H,P)).
// For a triple dataset: per-pair-slot label marginals.
struct CrossTable {
  LabelSet labels;
  std::vector<long long> counts;                      // row-major |L| x |L|
  std::vector<std::vector<long long>> slot_marginals; // triples only

  long long at(Label row, Label col) const;
};

CrossTable cross_table(const Dataset& pairs, const LabelSet& labels, const PredictFn& predict);
CrossTable cross_table(const Dataset& pairs, const ModelParams& model);
CrossTable triple_marginals(const Dataset& triples, const ModelParams& model);

std::string format_report(const ViolationReport& report);
std::string format_cross_table(const CrossTable& table);
// One metric per line, e.g. "rho_sym=0.186", for scripting.
std::string format_key_values(const ViolationReport& report);

}  // namespace logicloss
