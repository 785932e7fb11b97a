"""Logic-rule-to-loss compilation, training, and consistency metrics.

Declarative first-order rules over classifier predictions are lowered to
differentiable losses through t-norm relaxations; small classifiers can be
trained on labeled and unlabeled data against those losses, and prediction
inconsistency is measured with global/conditional violation rates.
"""

from logicloss._core import (
    CompiledLoss,
    CoverageReport,
    CrossTable,
    Dataset,
    DatasetBundle,
    EpochRecord,
    Formula,
    GenConfig,
    LabelSet,
    MlpConfig,
    Model,
    Rule,
    RuleSet,
    RuleStats,
    TNorm,
    TrainConfig,
    TrainLog,
    TrainResult,
    ViolationReport,
    compile_rules,
    coverage,
    cross_table,
    desugar,
    eval_boolean,
    format_formula,
    format_rules,
    generate,
    init_model,
    load_bundle,
    load_rules,
    oracle_label,
    parse_rules,
    save_bundle,
    symmetry_loss,
    train,
    transitivity_loss,
    triple_marginals,
    violations,
)

__all__ = [
    "CompiledLoss",
    "CoverageReport",
    "CrossTable",
    "Dataset",
    "DatasetBundle",
    "EpochRecord",
    "Formula",
    "GenConfig",
    "LabelSet",
    "MlpConfig",
    "Model",
    "Rule",
    "RuleSet",
    "RuleStats",
    "TNorm",
    "TrainConfig",
    "TrainLog",
    "TrainResult",
    "ViolationReport",
    "compile_rules",
    "coverage",
    "cross_table",
    "desugar",
    "eval_boolean",
    "format_formula",
    "format_rules",
    "generate",
    "init_model",
    "load_bundle",
    "load_rules",
    "oracle_label",
    "parse_rules",
    "save_bundle",
    "symmetry_loss",
    "train",
    "transitivity_loss",
    "triple_marginals",
    "violations",
]

__version__ = "0.1.0"
