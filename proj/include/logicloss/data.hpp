#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logicloss/labels.hpp"

namespace logicloss {

enum class CollectionKind { Single, Pair, Triple };

int slot_count(CollectionKind kind);
CollectionKind kind_from_name(std::string_view name);
std::string kind_name(CollectionKind kind);

// Ordered slot-index tuples a collection carries features for:
// Single: (0); Pair: (0,1), (1,0); Triple: (0,1), (1,2), (0,2).
const std::vector<std::vector<int>>& canonical_tuples(CollectionKind kind);

// A synthetic sentence: an interval on the real line (its latent meaning),
// a topic, and the noisy observation the classifier actually sees.
struct Sentence {
  int id = 0;
  double lo = 0.0;
  double hi = 0.0;
  int topic = 0;
  std::array<double, 4> observed{};  // (lo, hi, midpoint, width) + noise
};

// Entailment iff p's interval is contained in h's; Contradiction iff the
// intervals are disjoint; Neutral otherwise. Label indices follow the
// E, C, N declaration order.
Label oracle_label(const Sentence& p, const Sentence& h);
inline constexpr Label kEntail = 0, kContradict = 1, kNeutral = 2;

// A tuple of examples a rule quantifies over. Feature vectors are stored per
// canonical tuple; gold labels likewise (-1 where absent).
struct ExampleCollection {
  CollectionKind kind = CollectionKind::Pair;
  std::vector<int> sentence_ids;
  std::vector<std::vector<double>> features;
  std::vector<Label> gold;

  bool has_gold(int tuple_index) const { return gold[static_cast<std::size_t>(tuple_index)] >= 0; }
};

struct Dataset {
  int feature_dim = 0;
  std::vector<ExampleCollection> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

// Labeled splits plus the auxiliary unlabeled sets: M mirrors the labeled
// train pairs, T holds fresh same-topic triples, U mirrors the first pair of
// each triple in T. A held-out pair/triple set of the same construction is
// kept for evaluation.
struct DatasetBundle {
  LabelSet labels;
  int feature_dim = 0;
  Dataset train, dev, test;
  Dataset m, u, t;
  Dataset eval_pairs, eval_triples;
};

struct GenConfig {
  std::uint64_t seed = 1;
  int train = 5000;
  int dev = 1000;
  int test = 1000;
  int unlabeled = 1000;     // |U| = |T|
  int eval_pairs = 1000;
  int eval_triples = 1000;
  int topics = 50;
  double noise = 0.25;      // sigma of the observation noise
  int max_retries = 10000;  // per-example rejection budget when balancing labels
};

// Deterministic per seed: the same config regenerates byte-identical files.
// Labeled splits are balanced by cycling target labels; generation fails if
// a target label cannot be hit within the retry budget. Oracle labels over
// every generated triple are checked against the transitivity statements at
// generation time.
DatasetBundle generate(const GenConfig& config);

// (P,H) becomes unlabeled (H,P); features are the ordered concatenation
// recomputed for the swapped order. Output size equals input size.
Dataset mirror(const Dataset& pairs);

// The pairs (P,H), (H,Z), (P,Z) of a triple, in that order.
std::vector<ExampleCollection> triples_to_pairs(const ExampleCollection& triple);

// Tab-separated text, one collection per line; the header pins the schema
// version, feature dimension and label vocabulary. Externally produced files
// of the same schema load identically.
void save_dataset(const Dataset& ds, const LabelSet& labels, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, LabelSet* labels_out = nullptr);

// Writes/reads train.tsv, dev.tsv, test.tsv, m.tsv, u.tsv, t.tsv,
// eval_pairs.tsv, eval_triples.tsv under dir.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

// True when the three pair labels of a triple satisfy the transitivity
// statements; used as a generation-time self-check.
bool transitivity_consistent(Label ph, Label hz, Label pz);

}  // namespace logicloss
