"""Rank-product classification against an order-statistic threshold.

The statistic for one individual is the product over the panel of
up-regulated over down-regulated expression values, computed in log
space so extreme ratios cannot overflow. The critical value is the n-th
smallest statistic among the m+n training individuals: under the
weak-prior predictive, a fraction n/(m+n) of the pooled training mass
lies at or below it. An individual is Healthy when its statistic is <=
the critical value (boundary inclusive), Unhealthy otherwise.

The critical value is always taken from the empirical training
distribution of the statistic, including for DP-smoothed rankings with
positive concentrations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dataset import ExpressionMatrix
from .diffexpr import SignaturePanel
from .errors import NonPositiveExpression


class Label(str, Enum):
    UNHEALTHY = "unhealthy"
    HEALTHY = "healthy"


@dataclass(frozen=True)
class ClassifierModel:
    """A fitted panel classifier.

    ``training_t`` is the sorted tuple of statistics of all m+n training
    individuals; ``t_star`` is its n-th smallest element.
    """

    panel: SignaturePanel
    t_star: float
    training_t: tuple[float, ...]
    m: int
    n: int


def t_statistic(panel: SignaturePanel, individual) -> float:
    """Product over the panel of up-expression / down-expression.

    ``individual`` is the full expression vector indexed like the
    training matrix rows. Computed as the exponential of summed log
    ratios.
    """
    z = np.asarray(individual, dtype=np.float64)
    ups = z[list(panel.up)]
    downs = z[list(panel.down)]
    used = np.concatenate((ups, downs))
    if not np.all(np.isfinite(used)) or np.any(used <= 0.0):
        bad = used[~(np.isfinite(used) & (used > 0.0))][0]
        raise NonPositiveExpression(f"panel value {bad!r}")
    return math.exp(float(np.sum(np.log(ups)) - np.sum(np.log(downs))))


def fit(matrix: ExpressionMatrix, panel: SignaturePanel) -> ClassifierModel:
    """Fit the critical value from all training individuals."""
    t_values = []
    for col in matrix.case_columns + matrix.control_columns:
        try:
            t_values.append(t_statistic(panel, matrix.values[:, col]))
        except NonPositiveExpression as e:
            raise NonPositiveExpression(
                f"sample {matrix.sample_ids[col]!r}: {e}") from e
    t_sorted = tuple(sorted(t_values))
    n = matrix.n
    return ClassifierModel(panel=panel, t_star=t_sorted[n - 1],
                           training_t=t_sorted, m=matrix.m, n=n)


def classify(model: ClassifierModel, individual) -> Label:
    """Healthy when the statistic is <= the critical value."""
    t = t_statistic(model.panel, individual)
    return Label.HEALTHY if t <= model.t_star else Label.UNHEALTHY
