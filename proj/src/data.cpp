#include "logicloss/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "logicloss/rng.hpp"

namespace logicloss {

int slot_count(CollectionKind kind) {
  switch (kind) {
    case CollectionKind::Single: return 1;
    case CollectionKind::Pair: return 2;
    case CollectionKind::Triple: return 3;
  }
  return 0;
}

CollectionKind kind_from_name(std::string_view name) {
  if (name == "single") return CollectionKind::Single;
  if (name == "pair") return CollectionKind::Pair;
  if (name == "triple") return CollectionKind::Triple;
  throw std::invalid_argument("unknown collection kind: " + std::string(name));
}

std::string kind_name(CollectionKind kind) {
  switch (kind) {
    case CollectionKind::Single: return "single";
    case CollectionKind::Pair: return "pair";
    case CollectionKind::Triple: return "triple";
  }
  return "?";
}

const std::vector<std::vector<int>>& canonical_tuples(CollectionKind kind) {
  static const std::vector<std::vector<int>> single{{0}};
  static const std::vector<std::vector<int>> pair{{0, 1}, {1, 0}};
  static const std::vector<std::vector<int>> triple{{0, 1}, {1, 2}, {0, 2}};
  switch (kind) {
    case CollectionKind::Single: return single;
    case CollectionKind::Pair: return pair;
    case CollectionKind::Triple: return triple;
  }
  return single;
}

Label oracle_label(const Sentence& p, const Sentence& h) {
  const bool subset = h.lo <= p.lo && p.hi <= h.hi;
  if (subset) return kEntail;
  const bool disjoint = p.hi < h.lo || h.hi < p.lo;
  if (disjoint) return kContradict;
  return kNeutral;
}

bool transitivity_consistent(Label ph, Label hz, Label pz) {
  if (ph == kEntail && hz == kEntail && pz != kEntail) return false;
  if (ph == kEntail && hz == kContradict && pz != kContradict) return false;
  if (ph == kNeutral && hz == kEntail && pz == kContradict) return false;
  if (ph == kNeutral && hz == kContradict && pz == kEntail) return false;
  return true;
}

namespace {

std::vector<double> pair_features(const Sentence& a, const Sentence& b) {
  std::vector<double> f;
  f.reserve(a.observed.size() + b.observed.size());
  f.insert(f.end(), a.observed.begin(), a.observed.end());
  f.insert(f.end(), b.observed.begin(), b.observed.end());
  return f;
}

std::vector<double> swap_halves(const std::vector<double>& f) {
  const std::size_t half = f.size() / 2;
  std::vector<double> out;
  out.reserve(f.size());
  out.insert(out.end(), f.begin() + static_cast<std::ptrdiff_t>(half), f.end());
  out.insert(out.end(), f.begin(), f.begin() + static_cast<std::ptrdiff_t>(half));
  return out;
}

class World {
 public:
  World(const GenConfig& config) : config_(config), rng_(config.seed) {
    anchors_.reserve(static_cast<std::size_t>(config.topics));
    for (int t = 0; t < config.topics; ++t) anchors_.push_back(rng_.uniform(-8.0, 8.0));
  }

  Sentence sample_sentence(int topic) {
    Sentence s;
    s.id = next_id_++;
    s.topic = topic;
    const double center = anchors_[static_cast<std::size_t>(topic)] + rng_.uniform(-1.5, 1.5);
    const double half = rng_.uniform(0.1, 1.2);
    s.lo = center - half;
    s.hi = center + half;
    s.observed = {s.lo + rng_.normal(0.0, config_.noise),
                  s.hi + rng_.normal(0.0, config_.noise),
                  0.5 * (s.lo + s.hi) + rng_.normal(0.0, config_.noise),
                  (s.hi - s.lo) + rng_.normal(0.0, config_.noise)};
    return s;
  }

  ExampleCollection make_pair(const Sentence& a, const Sentence& b, Label gold01) {
    ExampleCollection c;
    c.kind = CollectionKind::Pair;
    c.sentence_ids = {a.id, b.id};
    c.features = {pair_features(a, b), pair_features(b, a)};
    c.gold = {gold01, -1};
    return c;
  }

  // Rejection-samples a same-topic pair whose oracle label equals target.
  ExampleCollection labeled_pair(Label target) {
    for (int attempt = 0; attempt < config_.max_retries; ++attempt) {
      const int topic = rng_.uniform_int(config_.topics);
      const Sentence a = sample_sentence(topic);
      const Sentence b = sample_sentence(topic);
      if (oracle_label(a, b) == target) return make_pair(a, b, target);
    }
    throw std::runtime_error("infeasible balance request: could not sample a '" +
                             std::string(1, "ECN"[target]) + "' pair within " +
                             std::to_string(config_.max_retries) + " retries");
  }

  Dataset labeled_split(int n, int dim) {
    Dataset ds;
    ds.feature_dim = dim;
    ds.items.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ds.items.push_back(labeled_pair(static_cast<Label>(i % 3)));
    return ds;
  }

  ExampleCollection sample_triple() {
    const int topic = rng_.uniform_int(config_.topics);
    const Sentence a = sample_sentence(topic);
    const Sentence b = sample_sentence(topic);
    const Sentence c = sample_sentence(topic);
    ExampleCollection col;
    col.kind = CollectionKind::Triple;
    col.sentence_ids = {a.id, b.id, c.id};
    col.features = {pair_features(a, b), pair_features(b, c), pair_features(a, c)};
    col.gold = {-1, -1, -1};
    if (!transitivity_consistent(oracle_label(a, b), oracle_label(b, c), oracle_label(a, c)))
      throw std::logic_error("interval semantics produced a transitivity-violating triple");
    return col;
  }

  Dataset triple_split(int n, int dim) {
    Dataset ds;
    ds.feature_dim = dim;
    ds.items.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ds.items.push_back(sample_triple());
    return ds;
  }

 private:
  GenConfig config_;
  RandomStream rng_;
  std::vector<double> anchors_;
  int next_id_ = 0;
};

Dataset first_pairs_mirrored(const Dataset& triples) {
  Dataset out;
  out.feature_dim = triples.feature_dim;
  out.items.reserve(triples.items.size());
  for (const auto& t : triples.items) {
    std::vector<ExampleCollection> pairs = triples_to_pairs(t);
    Dataset one;
    one.feature_dim = triples.feature_dim;
    one.items.push_back(std::move(pairs[0]));
    Dataset mirrored = mirror(one);
    out.items.push_back(std::move(mirrored.items[0]));
  }
  return out;
}

}  // namespace

DatasetBundle generate(const GenConfig& config) {
  if (config.train < 0 || config.dev < 0 || config.test < 0 || config.unlabeled < 0 ||
      config.eval_pairs < 0 || config.eval_triples < 0)
    throw std::invalid_argument("dataset sizes must be nonnegative");
  if (config.topics <= 0) throw std::invalid_argument("topic count must be positive");

  DatasetBundle bundle;
  bundle.labels = LabelSet({"E", "C", "N"});
  bundle.feature_dim = 8;

  World world(config);
  bundle.train = world.labeled_split(config.train, bundle.feature_dim);
  bundle.dev = world.labeled_split(config.dev, bundle.feature_dim);
  bundle.test = world.labeled_split(config.test, bundle.feature_dim);
  bundle.m = mirror(bundle.train);
  bundle.t = world.triple_split(config.unlabeled, bundle.feature_dim);
  bundle.u = first_pairs_mirrored(bundle.t);
  bundle.eval_triples = world.triple_split(config.eval_triples, bundle.feature_dim);
  // Evaluation pairs follow the same construction as U but from held-out
  // triples, so pair and triple metrics never share sentences.
  Dataset eval_source = world.triple_split(config.eval_pairs, bundle.feature_dim);
  bundle.eval_pairs = first_pairs_mirrored(eval_source);
  return bundle;
}

Dataset mirror(const Dataset& pairs) {
  Dataset out;
  out.feature_dim = pairs.feature_dim;
  out.items.reserve(pairs.items.size());
  for (const auto& c : pairs.items) {
    if (c.kind != CollectionKind::Pair)
      throw std::invalid_argument("mirror expects pair collections");
    ExampleCollection m;
    m.kind = CollectionKind::Pair;
    m.sentence_ids = {c.sentence_ids[1], c.sentence_ids[0]};
    m.features = {c.features[1], c.features[0]};
    m.gold = {-1, -1};
    out.items.push_back(std::move(m));
  }
  return out;
}

std::vector<ExampleCollection> triples_to_pairs(const ExampleCollection& triple) {
  if (triple.kind != CollectionKind::Triple)
    throw std::invalid_argument("triples_to_pairs expects a triple collection");
  std::vector<ExampleCollection> out;
  out.reserve(3);
  const auto& tuples = canonical_tuples(CollectionKind::Triple);
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    ExampleCollection p;
    p.kind = CollectionKind::Pair;
    p.sentence_ids = {triple.sentence_ids[static_cast<std::size_t>(tuples[k][0])],
                      triple.sentence_ids[static_cast<std::size_t>(tuples[k][1])]};
    p.features = {triple.features[k], swap_halves(triple.features[k])};
    p.gold = {triple.gold[k], -1};
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const LabelSet& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset: " + path.string());
  out << "# logicloss dataset v1\tdim=" << ds.feature_dim << "\tlabels=";
  for (int i = 0; i < labels.size(); ++i) {
    if (i) out << ",";
    out << labels.name(i);
  }
  out << "\n";
  for (const auto& c : ds.items) {
    out << kind_name(c.kind) << "\t";
    for (std::size_t i = 0; i < c.sentence_ids.size(); ++i) {
      if (i) out << ",";
      out << c.sentence_ids[i];
    }
    for (const auto& f : c.features) {
      out << "\t";
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) out << ",";
        out << format_double(f[i]);
      }
    }
    out << "\t";
    bool any = false;
    for (Label g : c.gold) any = any || g >= 0;
    if (!any) {
      out << "-";
    } else {
      for (std::size_t i = 0; i < c.gold.size(); ++i) {
        if (i) out << ",";
        out << (c.gold[i] >= 0 ? labels.name(c.gold[i]) : "-");
      }
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, LabelSet* labels_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# logicloss dataset v1\t", 0) != 0)
    throw std::runtime_error("dataset schema-version mismatch in " + path.string());
  const std::vector<std::string> header = split(line, '\t');
  if (header.size() != 3 || header[1].rfind("dim=", 0) != 0 || header[2].rfind("labels=", 0) != 0)
    throw std::runtime_error("malformed dataset header in " + path.string());
  Dataset ds;
  ds.feature_dim = std::stoi(header[1].substr(4));
  const LabelSet labels(split(header[2].substr(7), ','));
  if (labels_out) *labels_out = labels;

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cols = split(line, '\t');
    const auto fail = [&](const std::string& why) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (cols.size() < 3) fail("expected kind, ids, features, gold columns");
    ExampleCollection c;
    c.kind = kind_from_name(cols[0]);
    for (const auto& tok : split(cols[1], ',')) c.sentence_ids.push_back(std::stoi(tok));
    if (static_cast<int>(c.sentence_ids.size()) != slot_count(c.kind))
      fail("id count does not match collection kind");
    const std::size_t n_tuples = canonical_tuples(c.kind).size();
    if (cols.size() != 2 + n_tuples + 1)
      fail("expected " + std::to_string(n_tuples) + " feature columns");
    for (std::size_t k = 0; k < n_tuples; ++k) {
      std::vector<double> f;
      for (const auto& tok : split(cols[2 + k], ',')) f.push_back(std::stod(tok));
      if (static_cast<int>(f.size()) != ds.feature_dim) fail("feature dimension mismatch");
      c.features.push_back(std::move(f));
    }
    c.gold.assign(n_tuples, -1);
    const std::string& gold_col = cols.back();
    if (gold_col != "-") {
      const std::vector<std::string> toks = split(gold_col, ',');
      if (toks.size() > n_tuples) fail("more gold labels than tuples");
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] == "-") continue;
        const auto l = labels.find(toks[i]);
        if (!l) fail("undeclared gold label '" + toks[i] + "'");
        c.gold[i] = *l;
      }
    }
    ds.items.push_back(std::move(c));
  }
  return ds;
}

namespace {

const std::vector<std::pair<std::string, Dataset DatasetBundle::*>>& bundle_parts() {
  static const std::vector<std::pair<std::string, Dataset DatasetBundle::*>> parts{
      {"train.tsv", &DatasetBundle::train}, {"dev.tsv", &DatasetBundle::dev},
      {"test.tsv", &DatasetBundle::test},   {"m.tsv", &DatasetBundle::m},
      {"u.tsv", &DatasetBundle::u},         {"t.tsv", &DatasetBundle::t},
      {"eval_pairs.tsv", &DatasetBundle::eval_pairs},
      {"eval_triples.tsv", &DatasetBundle::eval_triples}};
  return parts;
}

}  // namespace

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, member] : bundle_parts())
    save_dataset(bundle.*member, bundle.labels, dir / name);
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  DatasetBundle bundle;
  bool first = true;
  for (const auto& [name, member] : bundle_parts()) {
    LabelSet labels;
    bundle.*member = load_dataset(dir / name, &labels);
    if (first) {
      bundle.labels = labels;
      bundle.feature_dim = (bundle.*member).feature_dim;
      first = false;
    } else if (!(labels == bundle.labels)) {
      throw std::runtime_error("bundle files disagree on label vocabulary in " + dir.string());
    }
  }
  return bundle;
}

}  // namespace logicloss
