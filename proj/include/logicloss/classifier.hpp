#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "logicloss/autodiff.hpp"
#include "logicloss/labels.hpp"

namespace logicloss {

struct MlpConfig {
  int feature_dim = 8;
  int hidden_dim = 16;
};

// A one-hidden-layer tanh MLP with a softmax head; the probability source
// every soft slot binds to. Parameters are stored flat (W1 row-major, b1,
// W2 row-major, b2). Owned exclusively by the trainer during optimization;
// read-only snapshots are safe to evaluate concurrently.
struct ModelParams {
  MlpConfig config;
  LabelSet labels;
  std::vector<double> values;

  int param_count() const {
    const int d = config.feature_dim, h = config.hidden_dim, l = labels.size();
    return h * d + h + l * h + l;
  }
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministic per seed.
ModelParams init_model(const MlpConfig& config, const LabelSet& labels, std::uint64_t seed);

// Softmax probabilities in label declaration order; entries sum to 1 and lie
// strictly inside (0, 1) up to floating-point rounding. Matches the tape
// built by append_mlp bit for bit.
std::vector<double> predict_proba(const ModelParams& model, std::span<const double> x);

// Argmax of predict_proba; exact ties go to the earliest declared label.
Label predict_label(const ModelParams& model, std::span<const double> x);
Label argmax_label(std::span<const double> probs);

// Text checkpoint: versioned header, label list, dims, then one parameter
// value per line. Reload is bit-exact.
void save_checkpoint(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

// Appends one classifier evaluation to a tape: feature inputs named
// "<prefix>[j]" and softmax outputs, one node per label. Parameter nodes use
// canonical names ("W1[i][j]", ...), so every call on one tape shares them.
struct MlpGraph {
  std::vector<NodeId> inputs;
  std::vector<NodeId> probs;
};
MlpGraph append_mlp(Tape& tape, const MlpConfig& config, int num_labels,
                    const std::string& input_prefix);

// The tape parameter names for a config, in flat storage order.
std::vector<std::string> canonical_param_names(const MlpConfig& config, int num_labels);

}  // namespace logicloss
