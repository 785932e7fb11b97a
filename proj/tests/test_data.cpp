#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "logicloss/data.hpp"

using namespace logicloss;

namespace {

Sentence interval(double lo, double hi) {
  Sentence s;
  s.lo = lo;
  s.hi = hi;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("oracle labels follow the interval semantics") {
  CHECK(oracle_label(interval(1, 2), interval(0, 3)) == kEntail);
  CHECK(oracle_label(interval(0, 1), interval(2, 3)) == kContradict);
  CHECK(oracle_label(interval(2, 3), interval(0, 1)) == kContradict);  // disjointness is symmetric
  CHECK(oracle_label(interval(0, 2), interval(1, 3)) == kNeutral);
  CHECK(oracle_label(interval(0, 3), interval(1, 2)) == kNeutral);  // superset, not subset
  CHECK(oracle_label(interval(1, 2), interval(1, 2)) == kEntail);   // reflexive containment
}

TEST_CASE("generated bundle is deterministic, balanced, and id-disjoint across splits") {
  GenConfig config;
  config.seed = 1;
  config.train = 300;
  config.dev = 60;
  config.test = 60;
  config.unlabeled = 100;
  config.eval_pairs = 50;
  config.eval_triples = 50;
  const DatasetBundle a = generate(config);
  const DatasetBundle b = generate(config);

  CHECK(a.train.size() == 300);
  CHECK(a.m.size() == a.train.size());
  CHECK(a.u.size() == a.t.size());
  CHECK(a.feature_dim == 8);

  // Determinism: byte-identical files.
  const auto dir_a = scratch_dir("logicloss_gen_a");
  const auto dir_b = scratch_dir("logicloss_gen_b");
  save_bundle(a, dir_a);
  save_bundle(b, dir_b);
  for (const auto& name : {"train.tsv", "dev.tsv", "test.tsv", "m.tsv", "u.tsv", "t.tsv",
                           "eval_pairs.tsv", "eval_triples.tsv"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));

  // Balance: the labeled splits cycle target labels.
  long long counts[3] = {0, 0, 0};
  for (const auto& c : a.train.items) ++counts[c.gold[0]];
  CHECK(counts[0] == 100);
  CHECK(counts[1] == 100);
  CHECK(counts[2] == 100);

  // Split hygiene: no sentence id is shared between labeled splits.
  const auto ids_of = [](const Dataset& ds) {
    std::set<int> ids;
    for (const auto& c : ds.items) ids.insert(c.sentence_ids.begin(), c.sentence_ids.end());
    return ids;
  };
  const auto train_ids = ids_of(a.train), dev_ids = ids_of(a.dev), test_ids = ids_of(a.test);
  for (int id : dev_ids) CHECK(train_ids.count(id) == 0);
  for (int id : test_ids) {
    CHECK(train_ids.count(id) == 0);
    CHECK(dev_ids.count(id) == 0);
  }

  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("gold labels equal the oracle and triples never violate the composition rules") {
  GenConfig config;
  config.seed = 5;
  config.train = 200;
  config.dev = 0;
  config.test = 0;
  config.unlabeled = 500;
  config.eval_pairs = 0;
  config.eval_triples = 0;
  const DatasetBundle bundle = generate(config);

  // M mirrors train exactly.
  REQUIRE(bundle.m.size() == bundle.train.size());
  for (std::size_t i = 0; i < bundle.train.size(); ++i) {
    const auto& orig = bundle.train.items[i];
    const auto& mirrored = bundle.m.items[i];
    CHECK(mirrored.sentence_ids[0] == orig.sentence_ids[1]);
    CHECK(mirrored.sentence_ids[1] == orig.sentence_ids[0]);
    CHECK(mirrored.features[0] == orig.features[1]);
    CHECK(mirrored.features[1] == orig.features[0]);
    CHECK(mirrored.gold[0] == -1);
  }

  // U holds the mirrored first pair of each triple.
  REQUIRE(bundle.u.size() == bundle.t.size());
  for (std::size_t i = 0; i < bundle.t.size(); ++i) {
    const auto& triple = bundle.t.items[i];
    const auto& pair = bundle.u.items[i];
    CHECK(pair.sentence_ids[0] == triple.sentence_ids[1]);
    CHECK(pair.sentence_ids[1] == triple.sentence_ids[0]);
    CHECK(pair.features[1] == triple.features[0]);
  }
}

TEST_CASE("the oracle itself is symmetric in contradiction and transitive") {
  // Exhaustive over a grid of interval pairs/triples.
  std::vector<Sentence> sentences;
  for (double lo = 0; lo < 4; lo += 1.0)
    for (double w = 0.5; w < 3; w += 1.0) sentences.push_back(interval(lo, lo + w));
  for (const auto& p : sentences) {
    for (const auto& h : sentences) {
      const bool pc = oracle_label(p, h) == kContradict;
      const bool hc = oracle_label(h, p) == kContradict;
      CHECK(pc == hc);
    }
  }
  for (const auto& p : sentences)
    for (const auto& h : sentences)
      for (const auto& z : sentences)
        CHECK(transitivity_consistent(oracle_label(p, h), oracle_label(h, z), oracle_label(p, z)));
}

TEST_CASE("zero sizes give an empty bundle") {
  GenConfig config;
  config.train = config.dev = config.test = config.unlabeled = 0;
  config.eval_pairs = config.eval_triples = 0;
  const DatasetBundle bundle = generate(config);
  CHECK(bundle.train.empty());
  CHECK(bundle.m.empty());
  CHECK(bundle.u.empty());
  CHECK(bundle.t.empty());
}

TEST_CASE("an exhausted retry budget is reported") {
  GenConfig config;
  config.train = 10;
  config.max_retries = 0;
  CHECK_THROWS_WITH_AS(generate(config), doctest::Contains("infeasible"), std::runtime_error);
}

TEST_CASE("negative sizes are rejected") {
  GenConfig config;
  config.train = -1;
  CHECK_THROWS_AS(generate(config), std::invalid_argument);
}

TEST_CASE("mirror swaps order, drops labels, and preserves size") {
  Dataset pairs;
  pairs.feature_dim = 4;
  ExampleCollection c;
  c.kind = CollectionKind::Pair;
  c.sentence_ids = {1, 2};
  c.features = {{1, 2, 3, 4}, {3, 4, 1, 2}};
  c.gold = {kContradict, -1};
  pairs.items.push_back(c);

  const Dataset m = mirror(pairs);
  REQUIRE(m.size() == 1);
  CHECK(m.items[0].sentence_ids == std::vector<int>{2, 1});
  CHECK(m.items[0].features[0] == c.features[1]);
  CHECK(m.items[0].features[1] == c.features[0]);
  CHECK(m.items[0].gold[0] == -1);

  CHECK(mirror(Dataset{}).empty());
}

TEST_CASE("triples_to_pairs emits (P,H), (H,Z), (P,Z) in order") {
  ExampleCollection t;
  t.kind = CollectionKind::Triple;
  t.sentence_ids = {7, 8, 9};
  t.features = {{1, 2, 10, 20}, {10, 20, 30, 40}, {1, 2, 30, 40}};
  t.gold = {-1, -1, -1};
  const auto pairs = triples_to_pairs(t);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].sentence_ids == std::vector<int>{7, 8});
  CHECK(pairs[1].sentence_ids == std::vector<int>{8, 9});
  CHECK(pairs[2].sentence_ids == std::vector<int>{7, 9});
  CHECK(pairs[0].features[0] == t.features[0]);
  // Reversed features are the swapped halves of the forward concatenation.
  CHECK(pairs[0].features[1] == std::vector<double>{10, 20, 1, 2});

  // Degenerate triple with a repeated sentence is permitted.
  ExampleCollection deg = t;
  deg.sentence_ids = {7, 7, 9};
  const auto deg_pairs = triples_to_pairs(deg);
  CHECK(deg_pairs[0].sentence_ids == std::vector<int>{7, 7});
}

TEST_CASE("dataset files round-trip byte-exactly") {
  GenConfig config;
  config.train = 50;
  config.dev = 10;
  config.test = 10;
  config.unlabeled = 20;
  config.eval_pairs = 10;
  config.eval_triples = 10;
  const DatasetBundle bundle = generate(config);

  const auto dir = scratch_dir("logicloss_roundtrip");
  save_bundle(bundle, dir);
  const DatasetBundle loaded = load_bundle(dir);
  CHECK(loaded.labels == bundle.labels);
  CHECK(loaded.feature_dim == bundle.feature_dim);
  CHECK(loaded.train.size() == bundle.train.size());

  const auto dir2 = scratch_dir("logicloss_roundtrip2");
  save_bundle(loaded, dir2);
  for (const auto& name : {"train.tsv", "dev.tsv", "test.tsv", "m.tsv", "u.tsv", "t.tsv",
                           "eval_pairs.tsv", "eval_triples.tsv"})
    CHECK(slurp(dir / name) == slurp(dir2 / name));

  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("externally produced files of the same schema load") {
  const auto dir = scratch_dir("logicloss_external");
  {
    std::ofstream out(dir / "ext.tsv");
    out << "# logicloss dataset v1\tdim=4\tlabels=E,C,N\n";
    out << "pair\t0,1\t0.5,1,-2,0.25\t-2,0.25,0.5,1\tC\n";
    out << "triple\t2,3,4\t1,2,3,4\t5,6,7,8\t1,2,7,8\t-\n";
    out << "single\t5\t0,0,1,1\tN\n";
  }
  LabelSet labels;
  const Dataset ds = load_dataset(dir / "ext.tsv", &labels);
  CHECK(labels == LabelSet({"E", "C", "N"}));
  REQUIRE(ds.size() == 3);
  CHECK(ds.items[0].kind == CollectionKind::Pair);
  CHECK(ds.items[0].gold[0] == kContradict);
  CHECK(ds.items[1].kind == CollectionKind::Triple);
  CHECK(ds.items[1].gold[0] == -1);
  CHECK(ds.items[2].kind == CollectionKind::Single);
  CHECK(ds.items[2].gold[0] == kNeutral);
  CHECK(ds.items[0].features[1] == std::vector<double>{-2, 0.25, 0.5, 1});
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed dataset files are rejected with positions") {
  const auto dir = scratch_dir("logicloss_malformed");
  {
    std::ofstream out(dir / "bad_header.tsv");
    out << "# some other format\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(dir / "bad_header.tsv"),
                       doctest::Contains("schema-version"), std::runtime_error);
  {
    std::ofstream out(dir / "bad_dim.tsv");
    out << "# logicloss dataset v1\tdim=4\tlabels=E,C,N\n";
    out << "pair\t0,1\t0.5,1\t-2,0.25,0.5,1\t-\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(dir / "bad_dim.tsv"), doctest::Contains(":2"),
                       std::runtime_error);
  std::filesystem::remove_all(dir);
}
