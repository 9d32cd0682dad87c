"""Predictive ranking and classification of two-group expression data.

Pipeline: ingest a GEO SOFT (GDS) or TSV expression table, rank probes
by the posterior predictive probability that a future case value is <=
a future control value, pick the first-k/last-k signature panel, and
classify individuals by a rank-product statistic against an
order-statistic critical value, with leave-one-out cross-validation for
choosing the panel size.
"""

from .classifier import ClassifierModel, Label, classify, fit, t_statistic
from .crossval import ConfusionTable, KSelectionReport, loocv, select_k
from .dataset import (
    ExpressionMatrix,
    Group,
    GroupAssignment,
    make_matrix,
    split_by_group,
    validate,
)
from .diffexpr import ProbeRanking, SignaturePanel, rank_probes, select_panel
from .dp_core import (
    BaseDistribution,
    DPConfig,
    PredictiveCDF,
    QuadratureSpec,
    continuous_base,
    empirical_cdf,
    eval_cdf,
    eval_cdf_left,
    lognormal_base,
    normal_base,
    posterior_predictive_cdf,
    prob_leq,
    prob_leq_weak_limit,
    uniform_base,
)
from .errors import (
    DpExprError,
    InputError,
    NumericalError,
    QuadratureFailure,
    UsageError,
)
from .soft_ingest import (
    SoftDataset,
    SoftSubset,
    load_table,
    parse_soft,
    parse_tsv_matrix,
    to_matrix,
)

__version__ = "0.1.0"
