#include "logicloss/autodiff.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace logicloss {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Param: return "param";
    case Op::Input: return "input";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Relu: return "relu";
    case Op::Abs: return "abs";
    case Op::Step: return "step";
  }
  return "?";
}

int op_arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Param:
    case Op::Input:
      return 0;
    case Op::Neg:
    case Op::Log:
    case Op::Exp:
    case Op::Relu:
    case Op::Abs:
    case Op::Step:
      return 1;
    default:
      return 2;
  }
}

NodeId Tape::push(Node n) {
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::pure(Op op, NodeId a, NodeId b, double payload) {
  // Add and Mul commute without changing the floating-point result, so a
  // canonical operand order improves sharing.
  if ((op == Op::Add || op == Op::Mul) && b >= 0 && b < a) std::swap(a, b);
  const auto key = std::make_tuple(static_cast<int>(op), a, b, payload);
  auto it = cse_.find(key);
  if (it != cse_.end()) return it->second;
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.value = payload;
  const NodeId id = push(n);
  cse_.emplace(key, id);
  return id;
}

NodeId Tape::constant(double v) { return pure(Op::Const, -1, -1, v); }

NodeId Tape::input(const std::string& name) {
  auto it = input_by_name_.find(name);
  if (it != input_by_name_.end()) return it->second;
  Node n;
  n.op = Op::Input;
  n.slot = static_cast<int>(input_names_.size());
  input_names_.push_back(name);
  const NodeId id = push(n);
  input_by_name_.emplace(name, id);
  return id;
}

NodeId Tape::param(const std::string& name) {
  auto it = param_by_name_.find(name);
  if (it != param_by_name_.end()) return it->second;
  Node n;
  n.op = Op::Param;
  n.slot = static_cast<int>(param_names_.size());
  param_names_.push_back(name);
  const NodeId id = push(n);
  param_by_name_.emplace(name, id);
  return id;
}

NodeId Tape::add(NodeId x, NodeId y) { return pure(Op::Add, x, y); }
NodeId Tape::sub(NodeId x, NodeId y) { return pure(Op::Sub, x, y); }
NodeId Tape::mul(NodeId x, NodeId y) { return pure(Op::Mul, x, y); }
NodeId Tape::div(NodeId x, NodeId y) { return pure(Op::Div, x, y); }
NodeId Tape::neg(NodeId x) { return pure(Op::Neg, x, -1); }
NodeId Tape::log(NodeId x) { return pure(Op::Log, x, -1); }
NodeId Tape::exp(NodeId x) { return pure(Op::Exp, x, -1); }
NodeId Tape::min(NodeId x, NodeId y) { return pure(Op::Min, x, y); }
NodeId Tape::max(NodeId x, NodeId y) { return pure(Op::Max, x, y); }
NodeId Tape::relu(NodeId x) { return pure(Op::Relu, x, -1); }
NodeId Tape::abs(NodeId x) { return pure(Op::Abs, x, -1); }
NodeId Tape::step(NodeId x) { return pure(Op::Step, x, -1); }

void Tape::set_root(NodeId id) {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw std::invalid_argument("root node out of range");
  root_ = id;
}

int Tape::input_slot(const std::string& name) const {
  auto it = input_by_name_.find(name);
  if (it == input_by_name_.end()) throw std::invalid_argument("unknown input: " + name);
  return nodes_[static_cast<std::size_t>(it->second)].slot;
}

int Tape::param_slot(const std::string& name) const {
  auto it = param_by_name_.find(name);
  if (it == param_by_name_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return nodes_[static_cast<std::size_t>(it->second)].slot;
}

Workspace Tape::make_workspace() const {
  Workspace ws;
  ws.inputs.assign(input_names_.size(), std::numeric_limits<double>::quiet_NaN());
  ws.params.assign(param_names_.size(), 0.0);
  ws.values.assign(nodes_.size(), 0.0);
  ws.adjoints.assign(nodes_.size(), 0.0);
  return ws;
}

std::string Tape::describe(NodeId id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  std::ostringstream ss;
  ss << "node " << id << " (" << op_name(n.op);
  if (n.op == Op::Input) ss << " " << input_names_[static_cast<std::size_t>(n.slot)];
  if (n.op == Op::Param) ss << " " << param_names_[static_cast<std::size_t>(n.slot)];
  if (n.a >= 0) ss << " " << n.a;
  if (n.b >= 0) ss << " " << n.b;
  ss << ")";
  return ss.str();
}

double Tape::forward(Workspace& ws) const {
  if (root_ < 0) throw std::logic_error("tape has no root");
  if (ws.values.size() != nodes_.size()) throw std::invalid_argument("workspace size mismatch");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double v = 0.0;
    const double* val = ws.values.data();
    switch (n.op) {
      case Op::Const: v = n.value; break;
      case Op::Input:
        v = ws.inputs[static_cast<std::size_t>(n.slot)];
        if (std::isnan(v))
          throw std::runtime_error("unbound input: " +
                                   input_names_[static_cast<std::size_t>(n.slot)]);
        break;
      case Op::Param: v = ws.params[static_cast<std::size_t>(n.slot)]; break;
      case Op::Add: v = val[n.a] + val[n.b]; break;
      case Op::Sub: v = val[n.a] - val[n.b]; break;
      case Op::Mul: v = val[n.a] * val[n.b]; break;
      case Op::Div: v = val[n.a] / val[n.b]; break;
      case Op::Neg: v = -val[n.a]; break;
      case Op::Log: v = std::log(val[n.a]); break;
      case Op::Exp: v = std::exp(val[n.a]); break;
      case Op::Min: v = val[n.a] <= val[n.b] ? val[n.a] : val[n.b]; break;
      case Op::Max: v = val[n.a] >= val[n.b] ? val[n.a] : val[n.b]; break;
      case Op::Relu: v = val[n.a] > 0.0 ? val[n.a] : 0.0; break;
      case Op::Abs: v = std::fabs(val[n.a]); break;
      case Op::Step: v = val[n.a] >= 0.0 ? 1.0 : 0.0; break;
    }
    if (!std::isfinite(v))
      throw NumericError("non-finite value at " + describe(static_cast<NodeId>(i)));
    ws.values[i] = v;
  }
  ws.forward_done = true;
  return ws.values[static_cast<std::size_t>(root_)];
}

void Tape::backward(Workspace& ws) const {
  if (!ws.forward_done) throw std::logic_error("backward before forward");
  std::fill(ws.adjoints.begin(), ws.adjoints.end(), 0.0);
  ws.adjoints[static_cast<std::size_t>(root_)] = 1.0;
  const double* val = ws.values.data();
  double* adj = ws.adjoints.data();
  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    const Node& n = nodes_[idx];
    const double w = adj[idx];
    if (w == 0.0) continue;
    switch (n.op) {
      case Op::Const:
      case Op::Param:
      case Op::Input:
        break;
      case Op::Add:
        adj[n.a] += w;
        adj[n.b] += w;
        break;
      case Op::Sub:
        adj[n.a] += w;
        adj[n.b] -= w;
        break;
      case Op::Mul:
        adj[n.a] += w * val[n.b];
        adj[n.b] += w * val[n.a];
        break;
      case Op::Div:
        adj[n.a] += w / val[n.b];
        adj[n.b] -= w * val[n.a] / (val[n.b] * val[n.b]);
        break;
      case Op::Neg:
        adj[n.a] -= w;
        break;
      case Op::Log:
        adj[n.a] += w / val[n.a];
        break;
      case Op::Exp:
        adj[n.a] += w * val[idx];
        break;
      case Op::Min:
        if (val[n.a] <= val[n.b]) adj[n.a] += w; else adj[n.b] += w;
        break;
      case Op::Max:
        if (val[n.a] >= val[n.b]) adj[n.a] += w; else adj[n.b] += w;
        break;
      case Op::Relu:
        if (val[n.a] > 0.0) adj[n.a] += w;
        break;
      case Op::Abs:
        if (val[n.a] > 0.0) adj[n.a] += w;
        else if (val[n.a] < 0.0) adj[n.a] -= w;
        break;
      case Op::Step:
        break;
    }
  }
  for (const auto& [name, id] : param_by_name_) {
    if (!std::isfinite(adj[id]))
      throw NumericError("non-finite adjoint for parameter " + name);
  }
}

Gradient Tape::gradient(const Workspace& ws) const {
  Gradient g;
  for (const auto& [name, id] : param_by_name_) {
    g[name] = ws.adjoints[static_cast<std::size_t>(id)];
  }
  return g;
}

double Tape::forward(const std::map<std::string, double>& inputs,
                     const std::map<std::string, double>& params) {
  if (scratch_.values.size() != nodes_.size()) scratch_ = make_workspace();
  std::fill(scratch_.inputs.begin(), scratch_.inputs.end(),
            std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, v] : inputs) scratch_.inputs[static_cast<std::size_t>(input_slot(name))] = v;
  for (const auto& [name, v] : params) scratch_.params[static_cast<std::size_t>(param_slot(name))] = v;
  return forward(scratch_);
}

Gradient Tape::backward() {
  backward(scratch_);
  return gradient(scratch_);
}

namespace {

// Distance of the evaluation point from the nearest subgradient kink,
// measured on the arguments of the kinked ops.
double kink_distance(const Tape& t, const Workspace& ws, NodeId* which) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.node_count(); ++i) {
    const Node& n = t.node(static_cast<NodeId>(i));
    double d = std::numeric_limits<double>::infinity();
    switch (n.op) {
      case Op::Min:
      case Op::Max:
        d = std::fabs(ws.values[static_cast<std::size_t>(n.a)] -
                      ws.values[static_cast<std::size_t>(n.b)]);
        break;
      case Op::Relu:
      case Op::Abs:
      case Op::Step:
        d = std::fabs(ws.values[static_cast<std::size_t>(n.a)]);
        break;
      default:
        break;
    }
    if (d < best) {
      best = d;
      if (which) *which = static_cast<NodeId>(i);
    }
  }
  return best;
}

}  // namespace

GradientCheck Tape::check_gradient(Workspace& ws, double h) const {
  GradientCheck result;
  forward(ws);
  NodeId kink_node = -1;
  const double kd = kink_distance(*this, ws, &kink_node);
  if (kd < 10.0 * h) {
    result.skipped = true;
    std::ostringstream ss;
    ss << "evaluation point within 10h of a kink at " << describe(kink_node);
    result.skip_reason = ss.str();
    return result;
  }
  backward(ws);
  const Gradient analytic = gradient(ws);
  for (std::size_t p = 0; p < param_names_.size(); ++p) {
    const double saved = ws.params[p];
    ws.params[p] = saved + h;
    const double up = forward(ws);
    ws.params[p] = saved - h;
    const double down = forward(ws);
    ws.params[p] = saved;
    const double central = (up - down) / (2.0 * h);
    const double a = analytic.at(param_names_[p]);
    const double err = std::fabs(a - central) / std::max(1.0, std::fabs(a));
    if (err > result.max_rel_error) result.max_rel_error = err;
    ++result.params_checked;
  }
  forward(ws);  // restore cached values at the base point
  backward(ws);
  return result;
}

std::string Tape::dump() const {
  std::ostringstream ss;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    ss << "(" << i << " " << op_name(n.op);
    switch (n.op) {
      case Op::Const: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", n.value);
        ss << " " << buf;
        break;
      }
      case Op::Input:
        ss << " \"" << input_names_[static_cast<std::size_t>(n.slot)] << "\"";
        break;
      case Op::Param:
        ss << " \"" << param_names_[static_cast<std::size_t>(n.slot)] << "\"";
        break;
      default:
        ss << " " << n.a;
        if (op_arity(n.op) == 2) ss << " " << n.b;
        break;
    }
    ss << ")\n";
  }
  ss << "(root " << root_ << ")\n";
  return ss.str();
}

}  // namespace logicloss
