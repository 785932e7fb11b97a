#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "logicloss/autodiff.hpp"
#include "logicloss/formula.hpp"

namespace logicloss {

// Probabilities are clamped into [kProbEps, 1] when bound to a slot, before
// any log, so losses stay finite when a model saturates.
inline constexpr double kProbEps = 1e-7;

enum class TNorm { Product, Goedel, Lukasiewicz };

TNorm tnorm_from_name(std::string_view name);  // product | godel | lukasiewicz
std::string tnorm_name(TNorm t);

// One bound probability: the model's probability of `label` on the example
// identified by `args`. kGoldLabel slots bind to the probability of the
// example's annotated label.
struct SoftSlot {
  std::vector<std::string> args;
  Label label;
  std::string input_name;  // input name in both graphs
};

// Per-tuple probability vectors (declaration order) plus gold labels where
// known; the values a compiled template is evaluated against.
struct SlotValues {
  std::map<std::vector<std::string>, std::vector<double>> probs;
  std::map<std::vector<std::string>, Label> gold;
};

// Resolves a predicate atom to a node holding its (already clamped)
// probability. Implementations exist for plain inputs (CompiledLoss) and for
// classifier outputs wired into the same tape (training templates).
class SlotResolver {
 public:
  virtual ~SlotResolver() = default;
  // label may be kGoldLabel.
  virtual NodeId prob(Tape& tape, const std::vector<std::string>& args, Label label) = 0;
};

// Appends the soft truth value of a desugared formula under the given t-norm.
// Output is in [0, 1] whenever all slot probabilities are. Throws if the
// formula still contains a biconditional.
NodeId append_truth(Tape& tape, const Formula& f, TNorm t, SlotResolver& slots);

// Appends the negative-log-space loss of a desugared formula. For the
// product t-norm this emits the algebraically simplified form (conjunctions
// become sums, residua become relu of log differences); for the others it is
// -log(clamp(truth)). The result is nonnegative and zero exactly when the
// clamped truth is 1.
NodeId append_loss(Tape& tape, const Formula& f, TNorm t, SlotResolver& slots);

// A rule lowered to a soft-truth graph and a loss graph over probability
// inputs. Immutable once compiled; evaluation uses caller-local workspaces,
// so sharing a template across threads is safe.
class CompiledLoss {
 public:
  CompiledLoss(const Rule& rule, const LabelSet& labels, TNorm t);

  const std::string& rule_name() const { return rule_name_; }
  TNorm tnorm() const { return tnorm_; }
  const Tape& truth_graph() const { return truth_graph_; }
  const Tape& loss_graph() const { return loss_graph_; }
  const std::vector<SoftSlot>& slots() const { return slots_; }
  const std::vector<std::vector<std::string>>& arg_tuples() const { return arg_tuples_; }
  const std::vector<std::string>& vars() const { return vars_; }
  const LabelSet& labels() const { return labels_; }
  // Human-readable algebraic form, e.g. "|log c(P,H) - log c(H,P)|".
  const std::string& algebraic() const { return algebraic_; }
  bool needs_gold() const { return needs_gold_; }

  double truth(const SlotValues& values) const;
  double loss(const SlotValues& values) const;

 private:
  std::vector<double> slot_inputs(const SlotValues& values) const;

  std::string rule_name_;
  TNorm tnorm_;
  LabelSet labels_;
  std::vector<std::string> vars_;
  Tape truth_graph_;
  Tape loss_graph_;
  std::vector<SoftSlot> slots_;
  std::vector<std::vector<std::string>> arg_tuples_;
  std::string algebraic_;
  bool needs_gold_ = false;
};

// One CompiledLoss per rule, in file order.
std::vector<CompiledLoss> compile(const RuleSet& rs, TNorm t);

std::string render_loss(const Rule& rule, const LabelSet& labels, TNorm t);

// Product-t-norm symmetry loss in closed form: |log c1 - log c2| on clamped
// probabilities. Kept alongside the compiled two-relu form; the two are
// interchangeable.
double symmetry_loss_closed_form(double c1, double c2);

// Product-t-norm transitivity loss for one example triple. Takes the three
// probability vectors (label order E, C, N style: entail, contradict,
// neutral as declared) for the pairs (P,H), (H,Z), (P,Z).
double transitivity_loss(const std::array<double, 3>& ph,
                         const std::array<double, 3>& hz,
                         const std::array<double, 3>& pz);

}  // namespace logicloss
