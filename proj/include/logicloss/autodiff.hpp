#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace logicloss {

// Raised when evaluation produces a non-finite value; distinct from usage
// errors so callers can map it to a dedicated exit code.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
  Const, Param, Input, Add, Sub, Mul, Div, Neg, Log, Exp, Min, Max, Relu, Abs, Step
};

const char* op_name(Op op);
int op_arity(Op op);

struct Node {
  Op op;
  NodeId a = -1;   // first child
  NodeId b = -1;   // second child
  int slot = -1;   // dense index into inputs/params for Input/Param nodes
  double value = 0.0;  // payload for Const
};

// Parameter adjoints after a backward pass, keyed by parameter name.
using Gradient = std::map<std::string, double>;

// Per-caller numeric scratch. The tape structure itself is immutable after
// construction and may be shared across threads; each thread evaluates with
// its own workspace.
struct Workspace {
  std::vector<double> inputs;   // dense by input slot; NaN = unbound
  std::vector<double> params;   // dense by parameter slot
  std::vector<double> values;   // per node, filled by forward
  std::vector<double> adjoints; // per node, filled by backward
  bool forward_done = false;
};

struct GradientCheck {
  bool skipped = false;          // evaluation point within 10h of a kink
  std::string skip_reason;
  double max_rel_error = 0.0;    // max over params of |analytic-central| / max(1,|analytic|)
  int params_checked = 0;
};

// Scalar expression graph in topological order with reverse-mode gradients.
// Structurally identical pure subexpressions are shared (one node), so a
// rule template stays compact. Subgradient conventions: Relu'(0) = 0,
// Abs'(0) = 0, Min/Max route the full adjoint to the attaining child and to
// the first child on exact ties, Step' = 0 everywhere.
class Tape {
 public:
  NodeId constant(double v);
  NodeId input(const std::string& name);  // returns the existing node if the name is known
  NodeId param(const std::string& name);

  NodeId add(NodeId x, NodeId y);
  NodeId sub(NodeId x, NodeId y);
  NodeId mul(NodeId x, NodeId y);
  NodeId div(NodeId x, NodeId y);
  NodeId neg(NodeId x);
  NodeId log(NodeId x);
  NodeId exp(NodeId x);
  NodeId min(NodeId x, NodeId y);
  NodeId max(NodeId x, NodeId y);
  NodeId relu(NodeId x);
  NodeId abs(NodeId x);
  NodeId step(NodeId x);  // 1 if x >= 0 else 0

  void set_root(NodeId id);
  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& param_names() const { return param_names_; }
  int input_slot(const std::string& name) const;
  int param_slot(const std::string& name) const;

  Workspace make_workspace() const;

  // Evaluates the graph; returns the root value. Throws on unbound inputs
  // and on non-finite intermediates (the message names the failing node).
  double forward(Workspace& ws) const;
  // Fills adjoints for every node; requires a prior forward on the same
  // workspace. All parameter adjoints are checked finite.
  void backward(Workspace& ws) const;
  Gradient gradient(const Workspace& ws) const;

  // Convenience single-threaded entry points using an internal workspace.
  double forward(const std::map<std::string, double>& inputs,
                 const std::map<std::string, double>& params = {});
  Gradient backward();

  // Central-difference check of every parameter adjoint at the workspace's
  // binding. Points closer than 10h to a Min/Max/Relu/Abs/Step kink are
  // reported as skipped rather than checked.
  GradientCheck check_gradient(Workspace& ws, double h) const;

  // One node per line: (id op children...), then (root id).
  std::string dump() const;

 private:
  NodeId push(Node n);
  NodeId pure(Op op, NodeId a, NodeId b, double payload = 0.0);
  double node_value(const Node& n, const Workspace& ws) const;
  std::string describe(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<std::string> input_names_;
  std::vector<std::string> param_names_;
  std::unordered_map<std::string, NodeId> input_by_name_;
  std::unordered_map<std::string, NodeId> param_by_name_;
  std::map<std::tuple<int, NodeId, NodeId, double>, NodeId> cse_;
  NodeId root_ = -1;
  Workspace scratch_;
};

}  // namespace logicloss
