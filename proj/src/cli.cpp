#include "logicloss/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "logicloss/config.hpp"
#include "logicloss/metrics.hpp"
#include "logicloss/parser.hpp"
#include "logicloss/trainer.hpp"

namespace logicloss {

namespace fs = std::filesystem;
using nlohmann::json;

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << bytes;
  if (!out) throw std::runtime_error("failed writing file: " + path.string());
}

void write_manifest(const fs::path& dir, const json& manifest) {
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

json hash_entry(const fs::path& path) {
  return json{{"path", path.string()}, {"fnv1a64", content_hash(read_file(path))}};
}

}  // namespace

std::string file_hash(const std::string& path) { return content_hash(read_file(path)); }

void cmd_gen(const GenOptions& options) {
  const DatasetBundle bundle = generate(options.gen);
  const fs::path dir(options.out_dir);
  save_bundle(bundle, dir);

  json manifest;
  manifest["command"] = "gen";
  manifest["options"] = {{"seed", options.gen.seed},
                         {"train", options.gen.train},
                         {"dev", options.gen.dev},
                         {"test", options.gen.test},
                         {"unlabeled", options.gen.unlabeled},
                         {"eval_pairs", options.gen.eval_pairs},
                         {"eval_triples", options.gen.eval_triples},
                         {"topics", options.gen.topics},
                         {"noise", options.gen.noise},
                         {"max_retries", options.gen.max_retries}};
  json outputs;
  for (const auto& name : {"train.tsv", "dev.tsv", "test.tsv", "m.tsv", "u.tsv", "t.tsv",
                           "eval_pairs.tsv", "eval_triples.tsv"})
    outputs[name] = content_hash(read_file(dir / name));
  manifest["outputs"] = outputs;
  write_manifest(dir, manifest);
}

void cmd_compile(const CompileOptions& options, std::ostream& out) {
  const RuleSet rules = load_rules(options.rules_path);
  const TNorm t = tnorm_from_name(options.tnorm);
  const std::vector<CompiledLoss> compiled = compile(rules, t);
  for (std::size_t i = 0; i < compiled.size(); ++i) {
    const CompiledLoss& c = compiled[i];
    out << format_rule(rules.rules[i], rules.labels) << "\n";
    out << c.algebraic() << "\n";
    if (options.dump) {
      out << "loss graph:\n" << c.loss_graph().dump();
    }
    out << "\n";
  }
}

namespace {

RunConfig resolve_train_config(const TrainOptions& options, json* manifest_config) {
  RunConfig rc;
  if (!options.config_path.empty()) {
    rc = load_run_config(options.config_path);
  }
  if (!options.data_dir.empty()) rc.data_dir = options.data_dir;
  if (!options.rules_path.empty()) rc.rules_path = options.rules_path;
  if (options.constraints) apply_constraints(rc.train, *options.constraints);
  if (options.tnorm) rc.train.tnorm = tnorm_from_name(*options.tnorm);
  if (options.seed) rc.train.seed = *options.seed;
  if (options.annotation) rc.train.use_annotation = *options.annotation;

  if (manifest_config) {
    const TrainConfig& t = rc.train;
    *manifest_config = {{"model", {{"feature_dim", t.model.feature_dim},
                                   {"hidden_dim", t.model.hidden_dim}}},
                        {"data", {{"dir", rc.data_dir}, {"rules", rc.rules_path}}},
                        {"train",
                         {{"stage1_epochs", t.stage1_epochs},
                          {"stage1_lr", t.stage1_lr},
                          {"stage2_epochs", t.stage2_epochs},
                          {"stage2_lr", t.stage2_lr},
                          {"batch_size", t.batch_size},
                          {"seed", t.seed},
                          {"beta1", t.adam.beta1},
                          {"beta2", t.adam.beta2},
                          {"eps_adam", t.adam.eps},
                          {"use_annotation", t.use_annotation}}},
                        {"constraints",
                         {{"datasets", constraints_string(t)},
                          {"lambda_m", t.lambda_m},
                          {"lambda_u", t.lambda_u},
                          {"lambda_t", t.lambda_t},
                          {"tnorm", tnorm_name(t.tnorm)}}}};
  }
  return rc;
}

}  // namespace

void cmd_train(const TrainOptions& options) {
  json config_json;
  const RunConfig rc = resolve_train_config(options, &config_json);
  const RuleSet rules = load_rules(rc.rules_path);
  const DatasetBundle bundle = load_bundle(rc.data_dir);

  const TrainResult result = train(rc.train, bundle, rules);

  const fs::path dir(options.out_dir);
  fs::create_directories(dir);
  save_checkpoint(result.params, dir / "checkpoint.ckpt");
  write_file(dir / "trainlog.tsv", result.log.to_tsv());

  json manifest;
  manifest["command"] = "train";
  manifest["config"] = config_json;
  json inputs;
  inputs["rules"] = hash_entry(rc.rules_path);
  for (const auto& name : {"train.tsv", "dev.tsv", "test.tsv", "m.tsv", "u.tsv", "t.tsv"})
    inputs[name] = hash_entry(fs::path(rc.data_dir) / name);
  manifest["inputs"] = inputs;
  json outputs;
  outputs["checkpoint.ckpt"] = content_hash(read_file(dir / "checkpoint.ckpt"));
  outputs["trainlog.tsv"] = content_hash(read_file(dir / "trainlog.tsv"));
  manifest["outputs"] = outputs;
  write_manifest(dir, manifest);
}

void cmd_eval(const EvalOptions& options, std::ostream& out) {
  const RuleSet rules = load_rules(options.rules_path);
  const ModelParams model = load_checkpoint(options.checkpoint);
  if (!(model.labels == rules.labels))
    throw std::runtime_error("checkpoint and rule file disagree on the label vocabulary");
  const DatasetBundle bundle = load_bundle(options.data_dir);

  // Inconsistency metrics over the held-out pair and triple sets; accuracy
  // and the annotation-rule view over the labeled test split.
  Dataset eval_mixed;
  eval_mixed.feature_dim = bundle.feature_dim;
  eval_mixed.items = bundle.eval_pairs.items;
  eval_mixed.items.insert(eval_mixed.items.end(), bundle.eval_triples.items.begin(),
                          bundle.eval_triples.items.end());
  const ViolationReport eval_report = violations(eval_mixed, rules, model);
  const ViolationReport test_report = violations(bundle.test, rules, model);

  std::ostringstream text, kv;
  text << "== evaluation set (" << bundle.eval_pairs.size() << " pairs, "
       << bundle.eval_triples.size() << " triples) ==\n";
  text << format_report(eval_report);
  kv << format_key_values(eval_report);
  if (test_report.accuracy) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", *test_report.accuracy);
    text << "test accuracy          " << buf << "\n";
    kv << "test_accuracy=" << buf << "\n";
  }

  const std::vector<CompiledLoss> compiled = compile(rules, TNorm::Product);
  for (const auto& c : compiled) {
    if (c.needs_gold()) continue;
    const Dataset* ds = nullptr;
    if (static_cast<int>(c.vars().size()) == 2 && !bundle.eval_pairs.empty())
      ds = &bundle.eval_pairs;
    if (static_cast<int>(c.vars().size()) == 3 && !bundle.eval_triples.empty())
      ds = &bundle.eval_triples;
    if (!ds) continue;
    const CoverageReport cov = coverage(*ds, c, model);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", cov.fraction);
    text << "coverage " << c.rule_name() << "      " << buf << " (" << cov.positive << "/"
         << cov.total << ")\n";
    kv << "coverage_" << c.rule_name() << "=" << buf << "\n";
  }

  std::string tables;
  if (!bundle.eval_pairs.empty())
    tables += format_cross_table(cross_table(bundle.eval_pairs, model));
  if (!bundle.eval_triples.empty())
    tables += format_cross_table(triple_marginals(bundle.eval_triples, model));

  out << text.str() << tables;

  if (!options.out_dir.empty()) {
    const fs::path dir(options.out_dir);
    fs::create_directories(dir);
    write_file(dir / "report.txt", text.str());
    write_file(dir / "report.kv", kv.str());
    write_file(dir / "crosstable.txt", tables);
    json manifest;
    manifest["command"] = "eval";
    manifest["options"] = {{"checkpoint", options.checkpoint},
                           {"data", options.data_dir},
                           {"rules", options.rules_path}};
    json inputs;
    inputs["checkpoint"] = hash_entry(options.checkpoint);
    inputs["rules"] = hash_entry(options.rules_path);
    for (const auto& name : {"test.tsv", "eval_pairs.tsv", "eval_triples.tsv"})
      inputs[name] = hash_entry(fs::path(options.data_dir) / name);
    manifest["inputs"] = inputs;
    json outputs;
    for (const auto& name : {"report.txt", "report.kv", "crosstable.txt"})
      outputs[name] = content_hash(read_file(dir / name));
    manifest["outputs"] = outputs;
    write_manifest(dir, manifest);
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Compiles declarative consistency rules over classifier predictions into "
               "differentiable losses; trains and evaluates small classifiers with them."};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset bundle");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.gen.seed, "Random seed");
  gen_cmd->add_option("--train", gen.gen.train, "Labeled training pairs")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--dev", gen.gen.dev, "Labeled dev pairs")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--test", gen.gen.test, "Labeled test pairs")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--unlabeled", gen.gen.unlabeled, "Size of U and T")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--eval-pairs", gen.gen.eval_pairs, "Held-out evaluation pairs")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--eval-triples", gen.gen.eval_triples, "Held-out evaluation triples")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--topics", gen.gen.topics, "Topic count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise", gen.gen.noise, "Observation noise sigma");
  gen_cmd->add_option("--max-retries", gen.gen.max_retries, "Rejection budget per example");

  CompileOptions comp;
  CLI::App* comp_cmd = app.add_subcommand("compile", "Lower a rule file to loss functions");
  comp_cmd->add_option("--rules", comp.rules_path, "Rule file")->required();
  comp_cmd->add_option("--tnorm", comp.tnorm, "product | godel | lukasiewicz");
  comp_cmd->add_flag("--dump", comp.dump, "Also print the loss graph");

  TrainOptions tr;
  std::string tr_constraints, tr_tnorm;
  std::uint64_t tr_seed = 0;
  bool tr_no_annotation = false;
  CLI::App* tr_cmd = app.add_subcommand("train", "Train a classifier");
  tr_cmd->add_option("--config", tr.config_path, "INI config file");
  tr_cmd->add_option("--data", tr.data_dir, "Dataset bundle directory");
  tr_cmd->add_option("--rules", tr.rules_path, "Rule file");
  CLI::Option* opt_constraints =
      tr_cmd->add_option("--constraints", tr_constraints, "none or subset of M,U,T");
  CLI::Option* opt_tnorm = tr_cmd->add_option("--tnorm", tr_tnorm, "product | godel | lukasiewicz");
  CLI::Option* opt_seed = tr_cmd->add_option("--seed", tr_seed, "Random seed");
  CLI::Option* opt_no_ann =
      tr_cmd->add_flag("--no-annotation", tr_no_annotation, "Train without the annotation loss");
  tr_cmd->add_option("--out", tr.out_dir, "Output directory")->required();

  EvalOptions ev;
  CLI::App* ev_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  ev_cmd->add_option("--data", ev.data_dir, "Dataset bundle directory")->required();
  ev_cmd->add_option("--rules", ev.rules_path, "Rule file")->required();
  ev_cmd->add_option("--out", ev.out_dir, "Report directory (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) {
      cmd_gen(gen);
    } else if (comp_cmd->parsed()) {
      cmd_compile(comp, std::cout);
    } else if (tr_cmd->parsed()) {
      if (*opt_constraints) tr.constraints = tr_constraints;
      if (*opt_tnorm) tr.tnorm = tr_tnorm;
      if (*opt_seed) tr.seed = tr_seed;
      if (*opt_no_ann) tr.annotation = !tr_no_annotation;
      cmd_train(tr);
    } else if (ev_cmd->parsed()) {
      cmd_eval(ev, std::cout);
    }
  } catch (const TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace logicloss
