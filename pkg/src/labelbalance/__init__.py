"""labelbalance: imbalance statistics, oversampling plans, and
macro-averaged ranking metrics for multi-label datasets.

The compute-heavy inner loops live in ``labelbalance._kernels`` with a
compiled and a pure-Python implementation selected at import time;
``labelbalance._kernels.ACTIVE_IMPL`` says which one is running.
"""

__version__ = "0.1.0"

from labelbalance.balancer import (
    BatchCoverage,
    OversamplingPlan,
    batch_coverage,
    build_plan,
    emit_expanded_index,
    example_weights,
    oversample_factors,
    plan_from_json,
    plan_to_json,
)
from labelbalance.dataset import (
    ClassEntry,
    ClassVocabulary,
    Example,
    LabelDataset,
    PriorVector,
    compute_priors,
    dataset_from_json,
    dataset_to_json,
    load_segments,
    parse_class_index_csv,
    parse_ontology_json,
    parse_segments_csv,
    synth_powerlaw,
)
from labelbalance.imbalance import (
    ImbalanceReport,
    gini_eq3,
    gini_mad_oracle,
    imbalance_ratio,
    imbalance_report,
)
from labelbalance.metrics import (
    DeltaReport,
    MetricReport,
    RegressionResult,
    auc_from_dprime,
    average_precision,
    delta_prior_regression,
    dprime_from_auc,
    macro_report,
    per_class_delta,
    roc_auc,
)
from labelbalance.scores import (
    EvalRun,
    read_scores_binary,
    read_scores_csv,
    write_scores_binary,
    write_scores_csv,
)
from labelbalance.selection import (
    MetricTrace,
    moving_average,
    parse_trace_csv,
    select_across_runs,
    select_checkpoint,
)

__all__ = [
    "BatchCoverage",
    "ClassEntry",
    "ClassVocabulary",
    "DeltaReport",
    "EvalRun",
    "Example",
    "ImbalanceReport",
    "LabelDataset",
    "MetricReport",
    "MetricTrace",
    "OversamplingPlan",
    "PriorVector",
    "RegressionResult",
    "auc_from_dprime",
    "average_precision",
    "batch_coverage",
    "build_plan",
    "compute_priors",
    "dataset_from_json",
    "dataset_to_json",
    "delta_prior_regression",
    "dprime_from_auc",
    "emit_expanded_index",
    "example_weights",
    "gini_eq3",
    "gini_mad_oracle",
    "imbalance_ratio",
    "imbalance_report",
    "load_segments",
    "macro_report",
    "moving_average",
    "oversample_factors",
    "parse_class_index_csv",
    "parse_ontology_json",
    "parse_segments_csv",
    "parse_trace_csv",
    "per_class_delta",
    "plan_from_json",
    "plan_to_json",
    "read_scores_binary",
    "read_scores_csv",
    "roc_auc",
    "select_across_runs",
    "select_checkpoint",
    "synth_powerlaw",
    "write_scores_binary",
    "write_scores_csv",
]
