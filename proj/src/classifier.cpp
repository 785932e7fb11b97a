#include "logicloss/classifier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "logicloss/rng.hpp"

namespace logicloss {

namespace {

// tanh written with a clamped exp so the tape (which has no tanh op) and the
// plain path compute identical doubles. tanh saturates well before |x| = 30,
// so the clamp does not change the value, only keeps exp finite.
constexpr double kTanhClamp = 30.0;

double tanh_clamped(double x) {
  const double xc = std::max(std::min(x, kTanhClamp), -kTanhClamp);
  const double e = std::exp(2.0 * xc);
  return (e - 1.0) / (e + 1.0);
}

NodeId append_tanh(Tape& t, NodeId x) {
  const NodeId hi = t.constant(kTanhClamp);
  const NodeId lo = t.constant(-kTanhClamp);
  const NodeId xc = t.max(t.min(x, hi), lo);
  const NodeId two = t.constant(2.0);
  const NodeId e = t.exp(t.mul(two, xc));
  const NodeId num = t.sub(e, t.constant(1.0));
  const NodeId den = t.add(e, t.constant(1.0));
  return t.div(num, den);
}

}  // namespace

ModelParams init_model(const MlpConfig& config, const LabelSet& labels, std::uint64_t seed) {
  if (config.feature_dim <= 0 || config.hidden_dim <= 0)
    throw std::invalid_argument("model dimensions must be positive");
  ModelParams m{config, labels, {}};
  m.values.resize(static_cast<std::size_t>(m.param_count()));
  RandomStream rng(seed);
  const int d = config.feature_dim, h = config.hidden_dim, l = labels.size();
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  std::size_t k = 0;
  for (int i = 0; i < h * d; ++i) m.values[k++] = rng.uniform(-s1, s1);
  for (int i = 0; i < h; ++i) m.values[k++] = rng.uniform(-s1, s1);
  for (int i = 0; i < l * h; ++i) m.values[k++] = rng.uniform(-s2, s2);
  for (int i = 0; i < l; ++i) m.values[k++] = rng.uniform(-s2, s2);
  return m;
}

std::vector<double> predict_proba(const ModelParams& model, std::span<const double> x) {
  const int d = model.config.feature_dim, h = model.config.hidden_dim;
  const int l = model.labels.size();
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("feature vector has " + std::to_string(x.size()) +
                                " entries, model expects " + std::to_string(d));
  const double* w1 = model.values.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + l * h;

  std::vector<double> hidden(static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    double s = b1[i];
    for (int j = 0; j < d; ++j) s = s + w1[i * d + j] * x[static_cast<std::size_t>(j)];
    hidden[static_cast<std::size_t>(i)] = tanh_clamped(s);
  }
  std::vector<double> logits(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    double s = b2[k];
    for (int i = 0; i < h; ++i) s = s + w2[k * h + i] * hidden[static_cast<std::size_t>(i)];
    logits[static_cast<std::size_t>(k)] = s;
  }
  double m = logits[0];
  for (int k = 1; k < l; ++k) m = m >= logits[static_cast<std::size_t>(k)] ? m : logits[static_cast<std::size_t>(k)];
  std::vector<double> probs(static_cast<std::size_t>(l));
  double denom = 0.0;
  for (int k = 0; k < l; ++k) {
    probs[static_cast<std::size_t>(k)] = std::exp(logits[static_cast<std::size_t>(k)] - m);
    denom = denom + probs[static_cast<std::size_t>(k)];
  }
  for (int k = 0; k < l; ++k) probs[static_cast<std::size_t>(k)] /= denom;
  return probs;
}

Label argmax_label(std::span<const double> probs) {
  Label best = 0;
  for (int k = 1; k < static_cast<int>(probs.size()); ++k) {
    if (probs[static_cast<std::size_t>(k)] > probs[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

Label predict_label(const ModelParams& model, std::span<const double> x) {
  const std::vector<double> p = predict_proba(model, x);
  return argmax_label(p);
}

void save_checkpoint(const ModelParams& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << "logicloss-checkpoint v1\n";
  out << "labels";
  for (const auto& n : model.labels.names()) out << " " << n;
  out << "\n";
  out << "dims " << model.config.feature_dim << " " << model.config.hidden_dim << " "
      << model.labels.size() << "\n";
  char buf[40];
  for (double v : model.values) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "logicloss-checkpoint v1")
    throw std::runtime_error("checkpoint schema-version mismatch in " + path.string());
  if (!std::getline(in, line) || line.rfind("labels ", 0) != 0)
    throw std::runtime_error("malformed checkpoint label list in " + path.string());
  std::istringstream ls(line.substr(7));
  std::vector<std::string> names;
  for (std::string n; ls >> n;) names.push_back(n);
  if (!std::getline(in, line) || line.rfind("dims ", 0) != 0)
    throw std::runtime_error("malformed checkpoint dims in " + path.string());
  MlpConfig config;
  int l = 0;
  if (std::sscanf(line.c_str(), "dims %d %d %d", &config.feature_dim, &config.hidden_dim, &l) != 3)
    throw std::runtime_error("malformed checkpoint dims in " + path.string());
  if (l != static_cast<int>(names.size()))
    throw std::runtime_error("checkpoint label count disagrees with dims in " + path.string());
  ModelParams m{config, LabelSet(names), {}};
  m.values.reserve(static_cast<std::size_t>(m.param_count()));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    m.values.push_back(std::stod(line));
  }
  if (static_cast<int>(m.values.size()) != m.param_count())
    throw std::runtime_error("checkpoint has " + std::to_string(m.values.size()) +
                             " values, expected " + std::to_string(m.param_count()));
  return m;
}

std::vector<std::string> canonical_param_names(const MlpConfig& config, int num_labels) {
  const int d = config.feature_dim, h = config.hidden_dim, l = num_labels;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(h * d + h + l * h + l));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < d; ++j)
      names.push_back("W1[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  for (int i = 0; i < h; ++i) names.push_back("b1[" + std::to_string(i) + "]");
  for (int k = 0; k < l; ++k)
    for (int i = 0; i < h; ++i)
      names.push_back("W2[" + std::to_string(k) + "][" + std::to_string(i) + "]");
  for (int k = 0; k < l; ++k) names.push_back("b2[" + std::to_string(k) + "]");
  return names;
}

MlpGraph append_mlp(Tape& tape, const MlpConfig& config, int num_labels,
                    const std::string& input_prefix) {
  const int d = config.feature_dim, h = config.hidden_dim, l = num_labels;
  MlpGraph g;
  g.inputs.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) g.inputs.push_back(tape.input(input_prefix + "[" + std::to_string(j) + "]"));

  std::vector<NodeId> hidden;
  hidden.reserve(static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    NodeId s = tape.param("b1[" + std::to_string(i) + "]");
    for (int j = 0; j < d; ++j) {
      const NodeId w = tape.param("W1[" + std::to_string(i) + "][" + std::to_string(j) + "]");
      s = tape.add(s, tape.mul(w, g.inputs[static_cast<std::size_t>(j)]));
    }
    hidden.push_back(append_tanh(tape, s));
  }
  std::vector<NodeId> logits;
  logits.reserve(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    NodeId s = tape.param("b2[" + std::to_string(k) + "]");
    for (int i = 0; i < h; ++i) {
      const NodeId w = tape.param("W2[" + std::to_string(k) + "][" + std::to_string(i) + "]");
      s = tape.add(s, tape.mul(w, hidden[static_cast<std::size_t>(i)]));
    }
    logits.push_back(s);
  }
  // Max-shifted softmax; the shift cancels analytically, so adjoint routing
  // at logit ties does not affect gradients.
  NodeId m = logits[0];
  for (int k = 1; k < l; ++k) m = tape.max(m, logits[static_cast<std::size_t>(k)]);
  std::vector<NodeId> exps;
  exps.reserve(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) exps.push_back(tape.exp(tape.sub(logits[static_cast<std::size_t>(k)], m)));
  NodeId denom = exps[0];
  for (int k = 1; k < l; ++k) denom = tape.add(denom, exps[static_cast<std::size_t>(k)]);
  g.probs.reserve(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) g.probs.push_back(tape.div(exps[static_cast<std::size_t>(k)], denom));
  return g;
}

}  // namespace logicloss
