#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "logicloss/classifier.hpp"
#include "logicloss/compile.hpp"
#include "logicloss/data.hpp"
#include "logicloss/formula.hpp"

namespace logicloss {

// Numerical failure during optimization (non-finite loss or gradient).
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LossWeights {
  double lambda_sym = 0.0;
  double lambda_tran = 0.0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  long long step = 0;
  std::vector<double> m, v;
};

// Standard bias-corrected update; a pure function of (params, grads, state,
// step index).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& config);

// Which term of the combined objective a rule feeds. Rules with gold atoms
// are annotation losses; among the rest, arity >= 3 counts as transitivity
// family and anything smaller as symmetry family.
enum class LossFamily { Annotation, Symmetry, Transitivity };
LossFamily loss_family(const Rule& rule);

// One rule lowered over classifier outputs: per-tuple feature inputs feed
// shared MLP parameter nodes, gold labels enter as one-hot inputs, and the
// root is the rule's loss. Built once, re-bound per example.
class LossTemplate {
 public:
  LossTemplate(const Rule& rule, const LabelSet& labels, const MlpConfig& config, TNorm t);

  const std::string& rule_name() const { return rule_name_; }
  LossFamily family() const { return family_; }
  int arity() const { return arity_; }
  bool needs_gold() const { return needs_gold_; }
  const Tape& tape() const { return tape_; }

  bool applicable(const ExampleCollection& col) const;

  // Binds the collection, runs forward (and backward when weight != 0),
  // and adds weight * dloss/dparam into grad (flat parameter layout).
  // Returns the unweighted loss value.
  double accumulate(const ExampleCollection& col, const ModelParams& model, double weight,
                    std::span<double> grad, Workspace& ws) const;

  Workspace make_workspace() const { return tape_.make_workspace(); }

 private:
  std::string rule_name_;
  LossFamily family_;
  int arity_ = 0;
  bool needs_gold_ = false;
  CollectionKind kind_ = CollectionKind::Pair;
  Tape tape_;
  std::vector<int> tuple_canon_;          // canonical tuple index per rule tuple
  std::vector<int> feature_slot_base_;    // first input slot of each tuple's features
  std::vector<int> gold_slot_base_;       // first input slot of each tuple's one-hot, -1 if none
  std::vector<NodeId> param_nodes_;       // tape node per flat parameter index
  std::vector<int> param_tape_slot_;      // tape param slot per flat parameter index
  int feature_dim_ = 0;
  int num_labels_ = 0;
};

// The lowered templates of a rule set plus per-template scratch space.
// Single-writer: one trainer thread drives it.
class TemplateSet {
 public:
  TemplateSet(const RuleSet& rules, const MlpConfig& config, TNorm t);

  std::size_t size() const { return templates_.size(); }
  const LossTemplate& at(std::size_t i) const { return templates_[i]; }
  Workspace& workspace(std::size_t i) { return workspaces_[i]; }

 private:
  std::vector<LossTemplate> templates_;
  std::vector<Workspace> workspaces_;
};

struct MixedLoss {
  double total = 0.0;  // weighted sum, the quantity actually minimized
  double ann = 0.0, sym = 0.0, tran = 0.0;  // unweighted per-family sums
};

// L = sum L_ann + lambda_sym * sum L_sym + lambda_tran * sum L_tran over the
// batch's applicable collections. Annotation terms require gold labels and
// use_annotation; zero-weighted families contribute exactly nothing.
// Parameter gradients are accumulated into grad.
MixedLoss mix_losses(std::span<const ExampleCollection* const> batch, const ModelParams& model,
                     const LossWeights& weights, TemplateSet& templates, bool use_annotation,
                     std::span<double> grad);

struct TrainConfig {
  MlpConfig model;
  int stage1_epochs = 30;
  double stage1_lr = 1e-2;
  int stage2_epochs = 30;
  double stage2_lr = 3e-3;
  int batch_size = 64;
  std::uint64_t seed = 1;
  AdamConfig adam;
  bool use_annotation = true;
  bool use_m = false, use_u = false, use_t = false;  // stage-2 auxiliary sets
  double lambda_m = 1.0;   // symmetry weight on mirrored labeled pairs
  double lambda_u = 0.1;   // symmetry weight on unlabeled pairs
  double lambda_t = 0.01;  // transitivity weight on unlabeled triples
  TNorm tnorm = TNorm::Product;
};

struct EpochRecord {
  int epoch = 0;  // 1-based, contiguous across stages
  int stage = 0;
  double loss_total = 0.0;  // weighted objective summed over the epoch
  double loss_ann = 0.0, loss_sym = 0.0, loss_tran = 0.0;  // unweighted sums
  std::optional<double> dev_accuracy;
  std::optional<double> rho_sym, tau_sym;
  std::optional<double> rho_tran, tau_tran;
  std::optional<double> coverage_sym, coverage_tran;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::string to_tsv() const;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Stage 1 minimizes the annotation loss on the labeled train split; stage 2
// continues at a lower rate with the configured constraint losses over
// M/U/T. Deterministic for a fixed config and seed, bit for bit.
TrainResult train(const TrainConfig& config, const DatasetBundle& bundle, const RuleSet& rules);

}  // namespace logicloss
