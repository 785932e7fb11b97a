#include "logicloss/compile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

#include "logicloss/parser.hpp"

namespace logicloss {

TNorm tnorm_from_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "product") return TNorm::Product;
  if (s == "godel" || s == "goedel") return TNorm::Goedel;
  if (s == "lukasiewicz") return TNorm::Lukasiewicz;
  throw std::invalid_argument("unknown t-norm: " + std::string(name));
}

std::string tnorm_name(TNorm t) {
  switch (t) {
    case TNorm::Product: return "product";
    case TNorm::Goedel: return "godel";
    case TNorm::Lukasiewicz: return "lukasiewicz";
  }
  return "?";
}

namespace {

std::string atom_text(const LabelSet& labels, const std::vector<std::string>& args,
                      Label label) {
  std::string name;
  if (label == kGoldLabel) {
    name = "y*";
  } else {
    name = labels.name(label);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  name += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) name += ",";
    name += args[i];
  }
  name += ")";
  return name;
}

// Creates one clamped input node per distinct (tuple, label) atom and
// records the slots in first-use order.
class InputSlotResolver : public SlotResolver {
 public:
  explicit InputSlotResolver(const LabelSet& labels) : labels_(labels) {}

  NodeId prob(Tape& tape, const std::vector<std::string>& args, Label label) override {
    const std::string name = atom_text(labels_, args, label);
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const NodeId raw = tape.input(name);
    const NodeId one = tape.constant(1.0);
    const NodeId eps = tape.constant(kProbEps);
    const NodeId clamped = tape.min(one, tape.max(raw, eps));
    cache_.emplace(name, clamped);
    slots_.push_back(SoftSlot{args, label, name});
    return clamped;
  }

  const std::vector<SoftSlot>& slots() const { return slots_; }

 private:
  const LabelSet& labels_;
  std::map<std::string, NodeId> cache_;
  std::vector<SoftSlot> slots_;
};

struct Lowering {
  Tape& tape;
  TNorm tnorm;
  SlotResolver& slots;

  NodeId one() { return tape.constant(1.0); }
  NodeId eps() { return tape.constant(kProbEps); }

  // Child expressions are lowered into named locals before any connective
  // node is built: node creation order (and so slot enumeration and graph
  // dumps) must not depend on argument evaluation order.
  NodeId truth(const Formula& f) {
    switch (f.conn) {
      case Conn::Top:
        return one();
      case Conn::Pred:
        return slots.prob(tape, f.args, f.label);
      case Conn::Not: {
        const NodeId a = truth(*f.lhs);
        return tape.sub(one(), a);
      }
      case Conn::And: {
        const NodeId a = truth(*f.lhs);
        const NodeId b = truth(*f.rhs);
        switch (tnorm) {
          case TNorm::Product: return tape.mul(a, b);
          case TNorm::Goedel: return tape.min(a, b);
          case TNorm::Lukasiewicz: {
            const NodeId sum = tape.add(a, b);
            return tape.relu(tape.sub(sum, one()));
          }
        }
        break;
      }
      case Conn::Or: {
        const NodeId a = truth(*f.lhs);
        const NodeId b = truth(*f.rhs);
        switch (tnorm) {
          case TNorm::Product: {
            const NodeId sum = tape.add(a, b);
            const NodeId prod = tape.mul(a, b);
            return tape.sub(sum, prod);
          }
          case TNorm::Goedel: return tape.max(a, b);
          case TNorm::Lukasiewicz: {
            const NodeId sum = tape.add(a, b);
            return tape.min(one(), sum);
          }
        }
        break;
      }
      case Conn::Implies: {
        const NodeId a = truth(*f.lhs);
        const NodeId b = truth(*f.rhs);
        // Antecedent and consequent are floored at eps so that a false
        // antecedent yields truth 1 even when the consequent is also 0.
        const NodeId af = tape.max(a, eps());
        const NodeId bf = tape.max(b, eps());
        switch (tnorm) {
          case TNorm::Product: {
            const NodeId ratio = tape.div(bf, af);
            return tape.min(one(), ratio);
          }
          case TNorm::Goedel:
            return tape.max(b, tape.step(tape.sub(bf, af)));
          case TNorm::Lukasiewicz: {
            const NodeId rest = tape.sub(one(), a);
            const NodeId sum = tape.add(rest, b);
            return tape.min(one(), sum);
          }
        }
        break;
      }
      case Conn::Iff:
        throw std::invalid_argument("biconditional encountered; desugar first");
    }
    throw std::logic_error("unreachable");
  }

  // log of the clamped soft truth, simplified for the product t-norm:
  // conjunction -> sum of logs, residuum -> -relu(log a - log b).
  NodeId log_truth(const Formula& f) {
    switch (f.conn) {
      case Conn::Top:
        return tape.constant(0.0);
      case Conn::Pred:
        return tape.log(slots.prob(tape, f.args, f.label));
      case Conn::Not: {
        const NodeId a = truth(*f.lhs);
        const NodeId complement = tape.sub(one(), a);
        return tape.log(tape.max(complement, eps()));
      }
      case Conn::And: {
        const NodeId a = log_truth(*f.lhs);
        const NodeId b = log_truth(*f.rhs);
        return tape.add(a, b);
      }
      case Conn::Or: {
        const NodeId t = truth(f);
        return tape.log(tape.max(t, eps()));
      }
      case Conn::Implies: {
        const NodeId a = log_truth(*f.lhs);
        const NodeId b = log_truth(*f.rhs);
        return tape.neg(tape.relu(tape.sub(a, b)));
      }
      case Conn::Iff:
        throw std::invalid_argument("biconditional encountered; desugar first");
    }
    throw std::logic_error("unreachable");
  }
};

}  // namespace

NodeId append_truth(Tape& tape, const Formula& f, TNorm t, SlotResolver& slots) {
  Lowering lower{tape, t, slots};
  return lower.truth(f);
}

NodeId append_loss(Tape& tape, const Formula& f, TNorm t, SlotResolver& slots) {
  Lowering lower{tape, t, slots};
  if (t == TNorm::Product) {
    // A single-implication body lowers to a bare relu term instead of
    // neg(neg(relu(...))).
    if (f.conn == Conn::Implies) {
      const NodeId a = lower.log_truth(*f.lhs);
      const NodeId b = lower.log_truth(*f.rhs);
      return tape.relu(tape.sub(a, b));
    }
    return tape.neg(lower.log_truth(f));
  }
  const NodeId truth = lower.truth(f);
  const NodeId one = tape.constant(1.0);
  const NodeId eps = tape.constant(kProbEps);
  const NodeId clamped = tape.max(tape.min(truth, one), eps);
  return tape.neg(tape.log(clamped));
}

namespace {

bool is_atom(const Formula& f) { return f.conn == Conn::Pred; }

std::string render_logsum(const Formula& f, const LabelSet& labels, TNorm t);

std::string render_truth_text(const Formula& f, const LabelSet& labels, TNorm t) {
  switch (f.conn) {
    case Conn::Top:
      return "1";
    case Conn::Pred:
      return atom_text(labels, f.args, f.label);
    case Conn::Not:
      return "(1 - " + render_truth_text(*f.lhs, labels, t) + ")";
    case Conn::And: {
      const std::string a = render_truth_text(*f.lhs, labels, t);
      const std::string b = render_truth_text(*f.rhs, labels, t);
      switch (t) {
        case TNorm::Product: return a + " * " + b;
        case TNorm::Goedel: return "min(" + a + ", " + b + ")";
        case TNorm::Lukasiewicz: return "max(0, " + a + " + " + b + " - 1)";
      }
      break;
    }
    case Conn::Or: {
      const std::string a = render_truth_text(*f.lhs, labels, t);
      const std::string b = render_truth_text(*f.rhs, labels, t);
      switch (t) {
        case TNorm::Product: return "(" + a + " + " + b + " - " + a + " * " + b + ")";
        case TNorm::Goedel: return "max(" + a + ", " + b + ")";
        case TNorm::Lukasiewicz: return "min(1, " + a + " + " + b + ")";
      }
      break;
    }
    case Conn::Implies: {
      const std::string a = render_truth_text(*f.lhs, labels, t);
      const std::string b = render_truth_text(*f.rhs, labels, t);
      switch (t) {
        case TNorm::Product: return "min(1, " + b + " / (" + a + "))";
        case TNorm::Goedel: return "(" + b + " >= " + a + " ? 1 : " + b + ")";
        case TNorm::Lukasiewicz: return "min(1, 1 - " + a + " + " + b + ")";
      }
      break;
    }
    case Conn::Iff: {
      const auto d = desugar(std::make_shared<Formula>(f));
      return render_truth_text(*d, labels, t);
    }
  }
  throw std::logic_error("unreachable");
}

std::string render_logsum(const Formula& f, const LabelSet& labels, TNorm t) {
  switch (f.conn) {
    case Conn::Top:
      return "0";
    case Conn::Pred:
      return "log " + atom_text(labels, f.args, f.label);
    case Conn::Not:
      if (is_atom(*f.lhs))
        return "log(1 - " + atom_text(labels, f.lhs->args, f.lhs->label) + ")";
      return "log(1 - " + render_truth_text(*f.lhs, labels, t) + ")";
    case Conn::And:
      return render_logsum(*f.lhs, labels, t) + " + " + render_logsum(*f.rhs, labels, t);
    case Conn::Or:
      return "log(" + render_truth_text(f, labels, t) + ")";
    case Conn::Implies:
      return "-relu(" + render_logsum(*f.lhs, labels, t) + " - " +
             render_logsum(*f.rhs, labels, t) + ")";
    case Conn::Iff:
      break;
  }
  throw std::logic_error("unreachable");
}

// One summand per implication clause of the product-compiled loss.
void render_product_terms(const Formula& body, const LabelSet& labels,
                          std::vector<std::string>& out) {
  switch (body.conn) {
    case Conn::And:
      render_product_terms(*body.lhs, labels, out);
      render_product_terms(*body.rhs, labels, out);
      return;
    case Conn::Iff:
      // Two atom-to-atom residua collapse to an absolute log difference:
      // relu(u) + relu(-u) = |u|.
      if (is_atom(*body.lhs) && is_atom(*body.rhs)) {
        out.push_back("|log " + atom_text(labels, body.lhs->args, body.lhs->label) +
                      " - log " + atom_text(labels, body.rhs->args, body.rhs->label) + "|");
        return;
      }
      render_product_terms(*desugar(std::make_shared<Formula>(body)), labels, out);
      return;
    case Conn::Implies: {
      const Formula& a = *body.lhs;
      const Formula& b = *body.rhs;
      std::string rhs = render_logsum(b, labels, TNorm::Product);
      if (b.conn == Conn::And) rhs = "(" + rhs + ")";
      if (a.conn == Conn::Top) {
        out.push_back("-" + rhs);
        return;
      }
      out.push_back("relu(" + render_logsum(a, labels, TNorm::Product) + " - " + rhs + ")");
      return;
    }
    default:
      throw std::logic_error("rule body is not in implication form");
  }
}

}  // namespace

std::string render_loss(const Rule& rule, const LabelSet& labels, TNorm t) {
  std::string out = "L_" + rule.name + " = ";
  if (t == TNorm::Product) {
    std::vector<std::string> terms;
    render_product_terms(*rule.body, labels, terms);
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i) out += " + ";
      out += terms[i];
    }
    return out;
  }
  out += "-log(clamp(" + render_truth_text(*rule.body, labels, t) + "))";
  return out;
}

CompiledLoss::CompiledLoss(const Rule& rule, const LabelSet& labels, TNorm t)
    : rule_name_(rule.name), tnorm_(t), labels_(labels), vars_(rule.vars) {
  const FormulaPtr body = desugar(rule.body);
  needs_gold_ = rule.needs_gold();
  arg_tuples_ = collect_arg_tuples(*body);
  {
    InputSlotResolver resolver(labels_);
    truth_graph_.set_root(append_truth(truth_graph_, *body, t, resolver));
    slots_ = resolver.slots();
  }
  {
    InputSlotResolver resolver(labels_);
    loss_graph_.set_root(append_loss(loss_graph_, *body, t, resolver));
    // Both graphs enumerate atoms in the same depth-first order.
    if (resolver.slots().size() != slots_.size())
      throw std::logic_error("slot enumeration mismatch between truth and loss graphs");
  }
  algebraic_ = render_loss(rule, labels_, t);
}

std::vector<double> CompiledLoss::slot_inputs(const SlotValues& values) const {
  std::vector<double> out;
  out.reserve(slots_.size());
  for (const auto& slot : slots_) {
    auto it = values.probs.find(slot.args);
    if (it == values.probs.end())
      throw std::invalid_argument("no probabilities bound for tuple of slot " + slot.input_name);
    const auto& p = it->second;
    if (static_cast<int>(p.size()) != labels_.size())
      throw std::invalid_argument("probability vector for slot " + slot.input_name + " has " +
                                  std::to_string(p.size()) + " entries, expected " +
                                  std::to_string(labels_.size()));
    Label l = slot.label;
    if (l == kGoldLabel) {
      auto g = values.gold.find(slot.args);
      if (g == values.gold.end())
        throw std::invalid_argument("no gold label bound for slot " + slot.input_name);
      l = g->second;
    }
    out.push_back(p[static_cast<std::size_t>(l)]);
  }
  return out;
}

double CompiledLoss::truth(const SlotValues& values) const {
  const std::vector<double> ins = slot_inputs(values);
  Workspace ws = truth_graph_.make_workspace();
  for (std::size_t i = 0; i < slots_.size(); ++i)
    ws.inputs[static_cast<std::size_t>(truth_graph_.input_slot(slots_[i].input_name))] = ins[i];
  return truth_graph_.forward(ws);
}

double CompiledLoss::loss(const SlotValues& values) const {
  const std::vector<double> ins = slot_inputs(values);
  Workspace ws = loss_graph_.make_workspace();
  for (std::size_t i = 0; i < slots_.size(); ++i)
    ws.inputs[static_cast<std::size_t>(loss_graph_.input_slot(slots_[i].input_name))] = ins[i];
  const double value = loss_graph_.forward(ws);
  if (value < 0.0)
    throw std::logic_error("negative loss from " + rule_name_);
  return value;
}

std::vector<CompiledLoss> compile(const RuleSet& rs, TNorm t) {
  // Lower-cased label names appear in slot names and renderings, so labels
  // must stay distinct under case folding.
  std::set<std::string> folded;
  for (const auto& name : rs.labels.names()) {
    std::string low = name;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!folded.insert(low).second)
      throw std::invalid_argument("label names collide under case folding: " + name);
  }
  std::vector<CompiledLoss> out;
  out.reserve(rs.rules.size());
  for (const auto& rule : rs.rules) out.emplace_back(rule, rs.labels, t);
  return out;
}

double symmetry_loss_closed_form(double c1, double c2) {
  const auto clamp = [](double p) { return std::min(1.0, std::max(p, kProbEps)); };
  return std::fabs(std::log(clamp(c1)) - std::log(clamp(c2)));
}

namespace {

const CompiledLoss& transitivity_template() {
  static const RuleSet rs = parse_rules(
      "labels: E, C, N\n"
      "rule tran over (P,H,Z):\n"
      "    (E(P,H) & E(H,Z) -> E(P,Z))\n"
      "  & (E(P,H) & C(H,Z) -> C(P,Z))\n"
      "  & (N(P,H) & E(H,Z) -> !C(P,Z))\n"
      "  & (N(P,H) & C(H,Z) -> !E(P,Z))\n");
  static const CompiledLoss tmpl(rs.rules[0], rs.labels, TNorm::Product);
  return tmpl;
}

void check_prob_vector(const std::array<double, 3>& p, const char* which) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string("malformed probability vector for ") + which);
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(std::string("probability vector for ") + which +
                                " does not sum to 1");
}

}  // namespace

double transitivity_loss(const std::array<double, 3>& ph, const std::array<double, 3>& hz,
                         const std::array<double, 3>& pz) {
  check_prob_vector(ph, "(P,H)");
  check_prob_vector(hz, "(H,Z)");
  check_prob_vector(pz, "(P,Z)");
  SlotValues values;
  values.probs[{"P", "H"}] = {ph[0], ph[1], ph[2]};
  values.probs[{"H", "Z"}] = {hz[0], hz[1], hz[2]};
  values.probs[{"P", "Z"}] = {pz[0], pz[1], pz[2]};
  return transitivity_template().loss(values);
}

}  // namespace logicloss
