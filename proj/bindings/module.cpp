#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "logicloss/cli.hpp"
#include "logicloss/compile.hpp"
#include "logicloss/config.hpp"
#include "logicloss/data.hpp"
#include "logicloss/metrics.hpp"
#include "logicloss/parser.hpp"
#include "logicloss/trainer.hpp"

namespace py = pybind11;
using namespace logicloss;

namespace {

// Python-facing slot binding: {("P","H"): [pE, pC, pN], ...} plus optional
// gold labels by name.
SlotValues slot_values_from_dicts(
    const CompiledLoss& compiled,
    const std::map<std::vector<std::string>, std::vector<double>>& probs,
    const std::map<std::vector<std::string>, std::string>& gold) {
  SlotValues values;
  values.probs = probs;
  for (const auto& [args, name] : gold) {
    const auto l = compiled.labels().find(name);
    if (!l) throw std::invalid_argument("undeclared gold label '" + name + "'");
    values.gold[args] = *l;
  }
  return values;
}

PredictionAssignment assignment_from_dicts(
    const LabelSet& labels,
    const std::map<std::vector<std::string>, std::string>& predicted,
    const std::map<std::vector<std::string>, std::string>& gold) {
  PredictionAssignment a;
  for (const auto& [args, name] : predicted) {
    const auto l = labels.find(name);
    if (!l) throw std::invalid_argument("undeclared label '" + name + "'");
    a.predicted[args] = *l;
  }
  for (const auto& [args, name] : gold) {
    const auto l = labels.find(name);
    if (!l) throw std::invalid_argument("undeclared label '" + name + "'");
    a.gold[args] = *l;
  }
  return a;
}

// Opaque formula handle; shared_ptr<const Formula> is not a usable pybind
// holder type.
struct PyFormula {
  FormulaPtr ptr;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core bindings: rule parsing, t-norm loss compilation, the synthetic data "
            "generator, violation metrics, and the trainer.";

  py::enum_<TNorm>(m, "TNorm")
      .value("PRODUCT", TNorm::Product)
      .value("GODEL", TNorm::Goedel)
      .value("LUKASIEWICZ", TNorm::Lukasiewicz);

  py::class_<LabelSet>(m, "LabelSet")
      .def(py::init<std::vector<std::string>>())
      .def_property_readonly("names", &LabelSet::names)
      .def("__len__", &LabelSet::size)
      .def("__repr__", [](const LabelSet& l) {
        std::string out = "LabelSet([";
        for (int i = 0; i < l.size(); ++i) out += (i ? ", " : "") + ("'" + l.name(i) + "'");
        return out + "])";
      });

  py::class_<PyFormula>(m, "Formula");

  py::class_<Rule>(m, "Rule")
      .def_readonly("name", &Rule::name)
      .def_readonly("vars", &Rule::vars)
      .def_property_readonly("body", [](const Rule& r) { return PyFormula{r.body}; });

  py::class_<RuleSet>(m, "RuleSet")
      .def_readonly("labels", &RuleSet::labels)
      .def_readonly("rules", &RuleSet::rules)
      .def("__repr__", [](const RuleSet& rs) { return format_rules(rs); });

  m.def("parse_rules", [](const std::string& text) { return parse_rules(text); },
        "Parse a rule file from text.");
  m.def("load_rules", &load_rules, "Parse a rule file from disk.");
  m.def("format_rules", &format_rules);
  m.def("format_formula", [](const PyFormula& f, const LabelSet& labels) {
    return format_formula(*f.ptr, labels);
  });
  m.def("desugar", [](const PyFormula& f) { return PyFormula{desugar(f.ptr)}; },
        "Expand every biconditional into its two implications.");
  m.def("eval_boolean",
        [](const PyFormula& f, const LabelSet& labels,
           const std::map<std::vector<std::string>, std::string>& predicted,
           const std::map<std::vector<std::string>, std::string>& gold) {
          return eval_boolean(*f.ptr, assignment_from_dicts(labels, predicted, gold));
        },
        py::arg("formula"), py::arg("labels"), py::arg("predicted"),
        py::arg("gold") = std::map<std::vector<std::string>, std::string>{},
        "Evaluate a formula under hard label decisions.");

  py::class_<CompiledLoss>(m, "CompiledLoss")
      .def_property_readonly("rule_name", &CompiledLoss::rule_name)
      .def_property_readonly("tnorm", &CompiledLoss::tnorm)
      .def_property_readonly("algebraic", &CompiledLoss::algebraic)
      .def("truth",
           [](const CompiledLoss& c,
              const std::map<std::vector<std::string>, std::vector<double>>& probs,
              const std::map<std::vector<std::string>, std::string>& gold) {
             return c.truth(slot_values_from_dicts(c, probs, gold));
           },
           py::arg("probs"), py::arg("gold") = std::map<std::vector<std::string>, std::string>{})
      .def("loss",
           [](const CompiledLoss& c,
              const std::map<std::vector<std::string>, std::vector<double>>& probs,
              const std::map<std::vector<std::string>, std::string>& gold) {
             return c.loss(slot_values_from_dicts(c, probs, gold));
           },
           py::arg("probs"), py::arg("gold") = std::map<std::vector<std::string>, std::string>{})
      .def("dump", [](const CompiledLoss& c) { return c.loss_graph().dump(); });

  m.def("compile_rules", &compile, py::arg("rules"), py::arg("tnorm") = TNorm::Product,
        "Lower every rule to a soft-truth graph and a loss graph.");
  m.def("symmetry_loss", &symmetry_loss_closed_form, py::arg("c1"), py::arg("c2"));
  m.def("transitivity_loss", &transitivity_loss, py::arg("ph"), py::arg("hz"), py::arg("pz"));

  py::class_<MlpConfig>(m, "MlpConfig")
      .def(py::init([](int feature_dim, int hidden_dim) {
             return MlpConfig{feature_dim, hidden_dim};
           }),
           py::arg("feature_dim") = 8, py::arg("hidden_dim") = 16)
      .def_readwrite("feature_dim", &MlpConfig::feature_dim)
      .def_readwrite("hidden_dim", &MlpConfig::hidden_dim);

  py::class_<ModelParams>(m, "Model")
      .def_readonly("labels", &ModelParams::labels)
      .def("predict_proba",
           [](const ModelParams& model, const std::vector<double>& x) {
             return predict_proba(model, x);
           })
      .def("predict_label",
           [](const ModelParams& model, const std::vector<double>& x) {
             return model.labels.name(predict_label(model, x));
           })
      .def("save", [](const ModelParams& model, const std::string& path) {
        save_checkpoint(model, path);
      })
      .def_static("load", [](const std::string& path) { return load_checkpoint(path); });

  m.def("init_model", &init_model, py::arg("config"), py::arg("labels"), py::arg("seed"));

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("seed", &GenConfig::seed)
      .def_readwrite("train", &GenConfig::train)
      .def_readwrite("dev", &GenConfig::dev)
      .def_readwrite("test", &GenConfig::test)
      .def_readwrite("unlabeled", &GenConfig::unlabeled)
      .def_readwrite("eval_pairs", &GenConfig::eval_pairs)
      .def_readwrite("eval_triples", &GenConfig::eval_triples)
      .def_readwrite("topics", &GenConfig::topics)
      .def_readwrite("noise", &GenConfig::noise);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("feature_dim", [](const Dataset& d) { return d.feature_dim; })
      .def("__len__", &Dataset::size);

  py::class_<DatasetBundle>(m, "DatasetBundle")
      .def_readonly("labels", &DatasetBundle::labels)
      .def_readonly("feature_dim", &DatasetBundle::feature_dim)
      .def_readonly("train", &DatasetBundle::train)
      .def_readonly("dev", &DatasetBundle::dev)
      .def_readonly("test", &DatasetBundle::test)
      .def_readonly("m", &DatasetBundle::m)
      .def_readonly("u", &DatasetBundle::u)
      .def_readonly("t", &DatasetBundle::t)
      .def_readonly("eval_pairs", &DatasetBundle::eval_pairs)
      .def_readonly("eval_triples", &DatasetBundle::eval_triples);

  m.def("generate", &generate, "Generate a synthetic dataset bundle.");
  m.def("save_bundle", &save_bundle);
  m.def("load_bundle", &load_bundle);
  m.def("oracle_label", [](double p_lo, double p_hi, double h_lo, double h_hi) {
    Sentence p, h;
    p.lo = p_lo; p.hi = p_hi;
    h.lo = h_lo; h.hi = h_hi;
    static const char* names[] = {"E", "C", "N"};
    return std::string(names[oracle_label(p, h)]);
  }, py::arg("p_lo"), py::arg("p_hi"), py::arg("h_lo"), py::arg("h_hi"));

  py::class_<RuleStats>(m, "RuleStats")
      .def_readonly("rule", &RuleStats::rule)
      .def_readonly("violated", &RuleStats::violated)
      .def_readonly("antecedent_active", &RuleStats::antecedent_active)
      .def_readonly("applicable", &RuleStats::applicable)
      .def_readonly("rho", &RuleStats::rho)
      .def_readonly("tau", &RuleStats::tau);

  py::class_<ViolationReport>(m, "ViolationReport")
      .def_readonly("numerator", &ViolationReport::numerator)
      .def_readonly("global_denominator", &ViolationReport::global_denominator)
      .def_readonly("conditional_denominator", &ViolationReport::conditional_denominator)
      .def_readonly("rho", &ViolationReport::rho)
      .def_readonly("tau", &ViolationReport::tau)
      .def_readonly("per_rule", &ViolationReport::per_rule)
      .def_readonly("accuracy", &ViolationReport::accuracy)
      .def("__repr__", [](const ViolationReport& r) { return format_report(r); });

  m.def("violations",
        [](const Dataset& ds, const RuleSet& rs, const ModelParams& model) {
          return violations(ds, rs, model);
        });

  py::class_<CoverageReport>(m, "CoverageReport")
      .def_readonly("positive", &CoverageReport::positive)
      .def_readonly("total", &CoverageReport::total)
      .def_readonly("fraction", &CoverageReport::fraction);

  m.def("coverage", &coverage);

  py::class_<CrossTable>(m, "CrossTable")
      .def_readonly("labels", &CrossTable::labels)
      .def_readonly("counts", &CrossTable::counts)
      .def_readonly("slot_marginals", &CrossTable::slot_marginals)
      .def("at", &CrossTable::at)
      .def("__repr__", [](const CrossTable& t) { return format_cross_table(t); });

  m.def("cross_table",
        [](const Dataset& pairs, const ModelParams& model) { return cross_table(pairs, model); });
  m.def("triple_marginals", &triple_marginals);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("model", &TrainConfig::model)
      .def_readwrite("stage1_epochs", &TrainConfig::stage1_epochs)
      .def_readwrite("stage1_lr", &TrainConfig::stage1_lr)
      .def_readwrite("stage2_epochs", &TrainConfig::stage2_epochs)
      .def_readwrite("stage2_lr", &TrainConfig::stage2_lr)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("use_annotation", &TrainConfig::use_annotation)
      .def_readwrite("use_m", &TrainConfig::use_m)
      .def_readwrite("use_u", &TrainConfig::use_u)
      .def_readwrite("use_t", &TrainConfig::use_t)
      .def_readwrite("lambda_m", &TrainConfig::lambda_m)
      .def_readwrite("lambda_u", &TrainConfig::lambda_u)
      .def_readwrite("lambda_t", &TrainConfig::lambda_t)
      .def_readwrite("tnorm", &TrainConfig::tnorm);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("stage", &EpochRecord::stage)
      .def_readonly("loss_total", &EpochRecord::loss_total)
      .def_readonly("loss_ann", &EpochRecord::loss_ann)
      .def_readonly("loss_sym", &EpochRecord::loss_sym)
      .def_readonly("loss_tran", &EpochRecord::loss_tran)
      .def_readonly("dev_accuracy", &EpochRecord::dev_accuracy)
      .def_readonly("rho_sym", &EpochRecord::rho_sym)
      .def_readonly("tau_sym", &EpochRecord::tau_sym)
      .def_readonly("rho_tran", &EpochRecord::rho_tran)
      .def_readonly("tau_tran", &EpochRecord::tau_tran);

  py::class_<TrainLog>(m, "TrainLog")
      .def_readonly("epochs", &TrainLog::epochs)
      .def("to_tsv", &TrainLog::to_tsv);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("log", &TrainResult::log);

  m.def("train", &train, py::arg("config"), py::arg("bundle"), py::arg("rules"),
        "Two-stage training: annotation loss first, then the configured constraint losses.");
}
