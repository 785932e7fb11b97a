#include "logicloss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "logicloss/metrics.hpp"
#include "logicloss/rng.hpp"

namespace logicloss {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamConfig& config) {
  if (params.size() != grads.size())
    throw std::invalid_argument("parameter/gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("optimizer state size mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
  }
}

LossFamily loss_family(const Rule& rule) {
  if (rule.needs_gold()) return LossFamily::Annotation;
  return rule.vars.size() >= 3 ? LossFamily::Transitivity : LossFamily::Symmetry;
}

namespace {

CollectionKind kind_for_arity(int arity) {
  switch (arity) {
    case 1: return CollectionKind::Single;
    case 2: return CollectionKind::Pair;
    case 3: return CollectionKind::Triple;
    default:
      throw std::invalid_argument("rules over " + std::to_string(arity) +
                                  " variables have no collection kind");
  }
}

// Wires predicate atoms to clamped classifier outputs; gold atoms select the
// annotated label through one-hot inputs, keeping one template per rule.
class TrainingSlotResolver : public SlotResolver {
 public:
  TrainingSlotResolver(const std::vector<std::vector<std::string>>& tuples,
                       const std::vector<MlpGraph>& graphs,
                       const std::vector<std::vector<NodeId>>& gold_inputs,
                       const LabelSet& labels)
      : tuples_(tuples), graphs_(graphs), gold_inputs_(gold_inputs), labels_(labels) {}

  NodeId prob(Tape& tape, const std::vector<std::string>& args, Label label) override {
    const std::size_t ti = tuple_index(args);
    if (label != kGoldLabel) return clamped(tape, ti, label);
    NodeId sum = -1;
    for (int l = 0; l < labels_.size(); ++l) {
      const NodeId term = tape.mul(gold_inputs_[ti][static_cast<std::size_t>(l)], clamped(tape, ti, l));
      sum = sum < 0 ? term : tape.add(sum, term);
    }
    return sum;
  }

 private:
  std::size_t tuple_index(const std::vector<std::string>& args) const {
    for (std::size_t i = 0; i < tuples_.size(); ++i)
      if (tuples_[i] == args) return i;
    throw std::logic_error("unknown argument tuple in training template");
  }

  NodeId clamped(Tape& tape, std::size_t tuple, Label label) {
    const auto key = std::make_pair(tuple, label);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const NodeId raw = graphs_[tuple].probs[static_cast<std::size_t>(label)];
    const NodeId one = tape.constant(1.0);
    const NodeId eps = tape.constant(kProbEps);
    const NodeId c = tape.min(one, tape.max(raw, eps));
    cache_.emplace(key, c);
    return c;
  }

  const std::vector<std::vector<std::string>>& tuples_;
  const std::vector<MlpGraph>& graphs_;
  const std::vector<std::vector<NodeId>>& gold_inputs_;
  const LabelSet& labels_;
  std::map<std::pair<std::size_t, Label>, NodeId> cache_;
};

}  // namespace

LossTemplate::LossTemplate(const Rule& rule, const LabelSet& labels, const MlpConfig& config,
                           TNorm t)
    : rule_name_(rule.name),
      family_(loss_family(rule)),
      arity_(static_cast<int>(rule.vars.size())),
      needs_gold_(rule.needs_gold()),
      kind_(kind_for_arity(arity_)),
      feature_dim_(config.feature_dim),
      num_labels_(labels.size()) {
  const FormulaPtr body = desugar(rule.body);
  const auto tuples = collect_arg_tuples(*body);

  // Resolve every argument tuple against the canonical feature tuples of the
  // collection kind this rule ranges over.
  std::map<std::string, int> var_slot;
  for (std::size_t i = 0; i < rule.vars.size(); ++i)
    var_slot[rule.vars[i]] = static_cast<int>(i);
  const auto& canon = canonical_tuples(kind_);
  for (const auto& args : tuples) {
    std::vector<int> slots;
    for (const auto& v : args) slots.push_back(var_slot.at(v));
    int found = -1;
    for (std::size_t k = 0; k < canon.size(); ++k) {
      if (canon[k] == slots) {
        found = static_cast<int>(k);
        break;
      }
    }
    if (found < 0)
      throw std::invalid_argument("rule '" + rule.name +
                                  "' references a tuple collections do not carry features for");
    tuple_canon_.push_back(found);
  }

  // Feature inputs and one classifier evaluation per tuple; parameter nodes
  // are shared across tuples by name.
  std::vector<MlpGraph> graphs;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const std::string prefix = "x" + std::to_string(i);
    graphs.push_back(append_mlp(tape_, config, num_labels_, prefix));
    feature_slot_base_.push_back(tape_.input_slot(prefix + "[0]"));
  }
  std::vector<std::vector<NodeId>> gold_inputs(tuples.size());
  gold_slot_base_.assign(tuples.size(), -1);
  if (needs_gold_) {
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      for (int l = 0; l < num_labels_; ++l) {
        const std::string name = "g" + std::to_string(i) + "[" + std::to_string(l) + "]";
        gold_inputs[i].push_back(tape_.input(name));
      }
      gold_slot_base_[i] = tape_.input_slot("g" + std::to_string(i) + "[0]");
    }
  }

  TrainingSlotResolver resolver(tuples, graphs, gold_inputs, labels);
  tape_.set_root(append_loss(tape_, *body, t, resolver));

  for (const auto& name : canonical_param_names(config, num_labels_)) {
    param_nodes_.push_back(tape_.param(name));
    param_tape_slot_.push_back(tape_.param_slot(name));
  }
}

bool LossTemplate::applicable(const ExampleCollection& col) const {
  if (col.kind != kind_) return false;
  if (needs_gold_) {
    for (int k : tuple_canon_) {
      if (!col.has_gold(k)) return false;
    }
  }
  return true;
}

double LossTemplate::accumulate(const ExampleCollection& col, const ModelParams& model,
                                double weight, std::span<double> grad, Workspace& ws) const {
  for (std::size_t f = 0; f < param_nodes_.size(); ++f)
    ws.params[static_cast<std::size_t>(param_tape_slot_[f])] = model.values[f];
  for (std::size_t i = 0; i < tuple_canon_.size(); ++i) {
    const auto& feat = col.features[static_cast<std::size_t>(tuple_canon_[i])];
    if (static_cast<int>(feat.size()) != feature_dim_)
      throw std::invalid_argument("feature dimension mismatch in rule '" + rule_name_ + "'");
    std::copy(feat.begin(), feat.end(),
              ws.inputs.begin() + feature_slot_base_[i]);
    if (gold_slot_base_[i] >= 0) {
      const Label g = col.gold[static_cast<std::size_t>(tuple_canon_[i])];
      for (int l = 0; l < num_labels_; ++l)
        ws.inputs[static_cast<std::size_t>(gold_slot_base_[i] + l)] = l == g ? 1.0 : 0.0;
    }
  }
  const double value = tape_.forward(ws);
  if (weight != 0.0 && !grad.empty()) {
    tape_.backward(ws);
    for (std::size_t f = 0; f < param_nodes_.size(); ++f)
      grad[f] += weight * ws.adjoints[static_cast<std::size_t>(param_nodes_[f])];
  }
  return value;
}

TemplateSet::TemplateSet(const RuleSet& rules, const MlpConfig& config, TNorm t) {
  for (const auto& rule : rules.rules) {
    templates_.emplace_back(rule, rules.labels, config, t);
    workspaces_.push_back(templates_.back().make_workspace());
  }
}

MixedLoss mix_losses(std::span<const ExampleCollection* const> batch, const ModelParams& model,
                     const LossWeights& weights, TemplateSet& templates, bool use_annotation,
                     std::span<double> grad) {
  MixedLoss out;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const LossTemplate& tmpl = templates.at(i);
    double weight = 0.0;
    switch (tmpl.family()) {
      case LossFamily::Annotation: weight = use_annotation ? 1.0 : 0.0; break;
      case LossFamily::Symmetry: weight = weights.lambda_sym; break;
      case LossFamily::Transitivity: weight = weights.lambda_tran; break;
    }
    if (weight == 0.0) continue;
    Workspace& ws = templates.workspace(i);
    for (const ExampleCollection* col : batch) {
      if (!tmpl.applicable(*col)) continue;
      const double v = tmpl.accumulate(*col, model, weight, grad, ws);
      out.total += weight * v;
      switch (tmpl.family()) {
        case LossFamily::Annotation: out.ann += v; break;
        case LossFamily::Symmetry: out.sym += v; break;
        case LossFamily::Transitivity: out.tran += v; break;
      }
    }
  }
  return out;
}

namespace {

struct IndexStream {
  const Dataset* ds = nullptr;
  std::vector<int> order;
  std::size_t pos = 0;

  void reshuffle(RandomStream& rng) {
    order.resize(ds->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    pos = 0;
  }

  // Next batch of up to n collections, reshuffling on wrap-around.
  std::vector<const ExampleCollection*> next(int n, RandomStream& rng) {
    std::vector<const ExampleCollection*> out;
    if (ds->empty()) return out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (pos >= order.size()) reshuffle(rng);
      out.push_back(&ds->items[static_cast<std::size_t>(order[pos++])]);
    }
    return out;
  }
};

std::optional<double> split_accuracy(const Dataset& ds, const ModelParams& model) {
  long long total = 0, correct = 0;
  for (const auto& col : ds.items) {
    for (std::size_t k = 0; k < col.gold.size(); ++k) {
      if (col.gold[k] < 0) continue;
      ++total;
      if (predict_label(model, col.features[k]) == col.gold[k]) ++correct;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::string format_opt(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

std::string format_val(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainLog::to_tsv() const {
  std::ostringstream ss;
  ss << "epoch\tstage\tloss_total\tloss_ann\tloss_sym\tloss_tran\tdev_accuracy\t"
        "rho_sym\ttau_sym\trho_tran\ttau_tran\tcoverage_sym\tcoverage_tran\n";
  for (const auto& e : epochs) {
    ss << e.epoch << "\t" << e.stage << "\t" << format_val(e.loss_total) << "\t"
       << format_val(e.loss_ann) << "\t" << format_val(e.loss_sym) << "\t"
       << format_val(e.loss_tran) << "\t" << format_opt(e.dev_accuracy) << "\t"
       << format_opt(e.rho_sym) << "\t" << format_opt(e.tau_sym) << "\t"
       << format_opt(e.rho_tran) << "\t" << format_opt(e.tau_tran) << "\t"
       << format_opt(e.coverage_sym) << "\t" << format_opt(e.coverage_tran) << "\n";
  }
  return ss.str();
}

TrainResult train(const TrainConfig& config, const DatasetBundle& bundle, const RuleSet& rules) {
  if (!(bundle.labels == rules.labels))
    throw std::invalid_argument("rule file and dataset disagree on the label vocabulary");
  if (config.model.feature_dim != bundle.feature_dim)
    throw std::invalid_argument("model feature_dim " + std::to_string(config.model.feature_dim) +
                                " does not match dataset dim " +
                                std::to_string(bundle.feature_dim));
  if (config.use_annotation && bundle.train.empty())
    throw TrainError("empty labeled set with annotation loss enabled");
  if (config.batch_size <= 0) throw std::invalid_argument("batch size must be positive");

  TemplateSet templates(rules, config.model, config.tnorm);
  ModelParams params = init_model(config.model, rules.labels, config.seed);
  const std::size_t n_params = params.values.size();
  AdamState adam;
  RandomStream shuffle_rng(config.seed ^ 0x7f4a7c15u);

  // Sub-rule-sets and compiled losses for per-epoch diagnostics.
  RuleSet sym_rules{rules.labels, {}}, tran_rules{rules.labels, {}};
  for (const auto& r : rules.rules) {
    if (loss_family(r) == LossFamily::Symmetry) sym_rules.rules.push_back(r);
    if (loss_family(r) == LossFamily::Transitivity) tran_rules.rules.push_back(r);
  }
  std::optional<CompiledLoss> sym_compiled, tran_compiled;
  if (!sym_rules.rules.empty())
    sym_compiled.emplace(sym_rules.rules[0], rules.labels, config.tnorm);
  if (!tran_rules.rules.empty())
    tran_compiled.emplace(tran_rules.rules[0], rules.labels, config.tnorm);

  TrainLog log;
  std::vector<double> grad(n_params, 0.0);
  int epoch_counter = 0;

  for (int stage = 1; stage <= 2; ++stage) {
    const int epochs = stage == 1 ? config.stage1_epochs : config.stage2_epochs;
    const double lr = stage == 1 ? config.stage1_lr : config.stage2_lr;
    const bool with_m = stage == 2 && config.use_m;
    const bool with_u = stage == 2 && config.use_u;
    const bool with_t = stage == 2 && config.use_t;

    IndexStream labeled{&bundle.train}, m{&bundle.m}, u{&bundle.u}, t{&bundle.t};

    std::size_t primary = config.use_annotation ? bundle.train.size() : 0;
    if (with_m) primary = std::max(primary, bundle.m.size());
    if (with_u) primary = std::max(primary, bundle.u.size());
    if (with_t) primary = std::max(primary, bundle.t.size());
    if (primary == 0 && epochs > 0)
      throw TrainError("no training data active in stage " + std::to_string(stage));
    const int steps = static_cast<int>((primary + static_cast<std::size_t>(config.batch_size) - 1) /
                                       static_cast<std::size_t>(config.batch_size));

    for (int epoch = 0; epoch < epochs; ++epoch) {
      if (config.use_annotation) labeled.reshuffle(shuffle_rng);
      if (with_m) m.reshuffle(shuffle_rng);
      if (with_u) u.reshuffle(shuffle_rng);
      if (with_t) t.reshuffle(shuffle_rng);

      EpochRecord rec;
      rec.epoch = ++epoch_counter;
      rec.stage = stage;

      for (int step = 0; step < steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        MixedLoss step_loss;
        const auto merge = [&](const MixedLoss& part) {
          step_loss.total += part.total;
          step_loss.ann += part.ann;
          step_loss.sym += part.sym;
          step_loss.tran += part.tran;
        };
        try {
          if (config.use_annotation) {
            const auto batch = labeled.next(config.batch_size, shuffle_rng);
            merge(mix_losses(batch, params, LossWeights{0.0, 0.0}, templates, true, grad));
          }
          if (with_m) {
            const auto batch = m.next(config.batch_size, shuffle_rng);
            merge(mix_losses(batch, params, LossWeights{config.lambda_m, 0.0}, templates, false, grad));
          }
          if (with_u) {
            const auto batch = u.next(config.batch_size, shuffle_rng);
            merge(mix_losses(batch, params, LossWeights{config.lambda_u, 0.0}, templates, false, grad));
          }
          if (with_t) {
            const auto batch = t.next(config.batch_size, shuffle_rng);
            merge(mix_losses(batch, params, LossWeights{0.0, config.lambda_t}, templates, false, grad));
          }
        } catch (const NumericError& e) {
          throw TrainError(std::string(e.what()) + " at stage " + std::to_string(stage) +
                           ", epoch " + std::to_string(rec.epoch) + ", step " +
                           std::to_string(step));
        }
        if (!std::isfinite(step_loss.total))
          throw TrainError("non-finite loss at stage " + std::to_string(stage) + ", epoch " +
                           std::to_string(rec.epoch) + ", step " + std::to_string(step));
        adam_step(params.values, grad, adam, lr, config.adam);
        rec.loss_total += step_loss.total;
        rec.loss_ann += step_loss.ann;
        rec.loss_sym += step_loss.sym;
        rec.loss_tran += step_loss.tran;
      }

      rec.dev_accuracy = split_accuracy(bundle.dev, params);
      if (!sym_rules.rules.empty() && !bundle.u.empty()) {
        const ViolationReport r = violations(bundle.u, sym_rules, params);
        rec.rho_sym = r.rho;
        rec.tau_sym = r.tau;
      }
      if (!tran_rules.rules.empty() && !bundle.t.empty()) {
        const ViolationReport r = violations(bundle.t, tran_rules, params);
        rec.rho_tran = r.rho;
        rec.tau_tran = r.tau;
      }
      if (sym_compiled && !bundle.u.empty())
        rec.coverage_sym = coverage(bundle.u, *sym_compiled, params).fraction;
      if (tran_compiled && !bundle.t.empty())
        rec.coverage_tran = coverage(bundle.t, *tran_compiled, params).fraction;
      log.epochs.push_back(rec);
    }
  }
  return TrainResult{std::move(params), std::move(log)};
}

}  // namespace logicloss
