"""Leave-one-out cross-validation and panel-size selection.

Each individual is held out in turn and classified against a threshold
recomputed from the remaining individuals: the n-th smallest remaining
statistic when a case is held out, the (n-1)-th smallest when a control
is (one control being absent shifts the order statistic by one).

By default the ranking and panel are computed once from the full data
and only the threshold is refit per fold. The stricter refit_panel mode
recomputes the ranking and panel inside every fold; it is an extension
beyond the default behavior and needs at least two samples per group.

Panel-size selection runs LOOCV for k = 1..k_max and picks the k
minimizing (|FNR - FPR|, FNR + FPR, k) lexicographically: the smallest
panel with the best balance between false negatives and false
positives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import t_statistic
from .dataset import ExpressionMatrix, Group
from .diffexpr import ProbeRanking, rank_probes, select_panel
from .dp_core import DEFAULT_QUADRATURE, DPConfig, QuadratureSpec
from .errors import UsageError


@dataclass(frozen=True)
class ConfusionTable:
    case_unhealthy: int
    case_healthy: int
    control_unhealthy: int
    control_healthy: int

    @property
    def m(self) -> int:
        return self.case_unhealthy + self.case_healthy

    @property
    def n(self) -> int:
        return self.control_unhealthy + self.control_healthy

    @property
    def sensitivity(self) -> float:
        return self.case_unhealthy / self.m

    @property
    def specificity(self) -> float:
        return self.control_healthy / self.n

    @property
    def false_negative_rate(self) -> float:
        return self.case_healthy / self.m

    @property
    def false_positive_rate(self) -> float:
        return self.control_unhealthy / self.n


def balance_score(table: ConfusionTable) -> float:
    """Absolute gap between false-negative and false-positive rates."""
    return abs(table.false_negative_rate - table.false_positive_rate)


@dataclass(frozen=True)
class KSelectionReport:
    """LOOCV results per panel size and the selected size."""

    per_k: tuple[tuple[int, ConfusionTable, float], ...]
    chosen_k: int


def loocv(matrix: ExpressionMatrix, k: int, config: DPConfig,
          quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
          refit_panel: bool = False, threads: int = 1) -> ConfusionTable:
    """Leave-one-out confusion table for panel size k."""
    _check_group_sizes(matrix, refit_panel)
    if refit_panel:
        fold_rankings = _fold_rankings(matrix, config, quadrature, threads)
        return _tally_refit(matrix, k, fold_rankings)
    ranking = rank_probes(matrix, config, quadrature, threads)
    return _tally_fixed_panel(matrix, k, ranking)


def select_k(matrix: ExpressionMatrix, k_max: int, config: DPConfig,
             quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
             refit_panel: bool = False, threads: int = 1
             ) -> KSelectionReport:
    """Run LOOCV for k = 1..k_max and choose the best-balanced size."""
    if k_max < 1:
        raise UsageError(f"k_max must be >= 1, got {k_max}")
    if 2 * k_max > matrix.p:
        raise UsageError(
            f"k_max={k_max} needs 2*k_max <= p, but p={matrix.p}")
    _check_group_sizes(matrix, refit_panel)

    if refit_panel:
        fold_rankings = _fold_rankings(matrix, config, quadrature, threads)
        tables = [_tally_refit(matrix, k, fold_rankings)
                  for k in range(1, k_max + 1)]
    else:
        ranking = rank_probes(matrix, config, quadrature, threads)
        tables = [_tally_fixed_panel(matrix, k, ranking)
                  for k in range(1, k_max + 1)]

    per_k = tuple((k, t, balance_score(t))
                  for k, t in zip(range(1, k_max + 1), tables))
    chosen_k = min(
        per_k,
        key=lambda kt: (kt[2],
                        kt[1].false_negative_rate
                        + kt[1].false_positive_rate,
                        kt[0]),
    )[0]
    return KSelectionReport(per_k=per_k, chosen_k=chosen_k)


def _check_group_sizes(matrix: ExpressionMatrix, refit_panel: bool) -> None:
    if matrix.n < 2:
        raise UsageError("LOOCV needs at least 2 controls so a held-out "
                         "control leaves a nonempty control group")
    if refit_panel and matrix.m < 2:
        raise UsageError("refit-panel LOOCV needs at least 2 cases so a "
                         "held-out case leaves a nonempty case group")


def _tally_fixed_panel(matrix: ExpressionMatrix, k: int,
                       ranking: ProbeRanking) -> ConfusionTable:
    """LOOCV with the full-data panel; only thresholds are refit."""
    panel = select_panel(ranking, k)
    cols = list(range(len(matrix.sample_ids)))
    t_by_col = np.array([t_statistic(panel, matrix.values[:, c])
                         for c in cols])
    sorted_t = np.sort(t_by_col)
    counts = {(Group.CASE, True): 0, (Group.CASE, False): 0,
              (Group.CONTROL, True): 0, (Group.CONTROL, False): 0}
    n = matrix.n
    for col in matrix.case_columns + matrix.control_columns:
        s = t_by_col[col]
        remaining = np.delete(sorted_t,
                              np.searchsorted(sorted_t, s, side="left"))
        group = matrix.groups[col]
        threshold = remaining[n - 1] if group is Group.CASE \
            else remaining[n - 2]
        counts[(group, bool(s <= threshold))] += 1
    return ConfusionTable(
        case_unhealthy=counts[(Group.CASE, False)],
        case_healthy=counts[(Group.CASE, True)],
        control_unhealthy=counts[(Group.CONTROL, False)],
        control_healthy=counts[(Group.CONTROL, True)],
    )


def _drop_column(matrix: ExpressionMatrix, col: int) -> ExpressionMatrix:
    keep = [i for i in range(len(matrix.sample_ids)) if i != col]
    return ExpressionMatrix(
        probe_ids=matrix.probe_ids,
        probe_identifiers=matrix.probe_identifiers,
        sample_ids=tuple(matrix.sample_ids[i] for i in keep),
        values=matrix.values[:, keep],
        groups=tuple(matrix.groups[i] for i in keep),
    )


def _fold_rankings(matrix: ExpressionMatrix, config: DPConfig,
                   quadrature: QuadratureSpec, threads: int
                   ) -> dict[int, ProbeRanking]:
    """Per-fold rankings for refit mode, shared across panel sizes."""
    return {col: rank_probes(_drop_column(matrix, col), config, quadrature,
                             threads)
            for col in range(len(matrix.sample_ids))}


def _tally_refit(matrix: ExpressionMatrix, k: int,
                 fold_rankings: dict[int, ProbeRanking]) -> ConfusionTable:
    counts = {(Group.CASE, True): 0, (Group.CASE, False): 0,
              (Group.CONTROL, True): 0, (Group.CONTROL, False): 0}
    n = matrix.n
    for col in matrix.case_columns + matrix.control_columns:
        panel = select_panel(fold_rankings[col], k)
        s = t_statistic(panel, matrix.values[:, col])
        rest = [t_statistic(panel, matrix.values[:, c])
                for c in range(len(matrix.sample_ids)) if c != col]
        rest.sort()
        group = matrix.groups[col]
        threshold = rest[n - 1] if group is Group.CASE else rest[n - 2]
        counts[(group, s <= threshold)] += 1
    return ConfusionTable(
        case_unhealthy=counts[(Group.CASE, False)],
        case_healthy=counts[(Group.CASE, True)],
        control_unhealthy=counts[(Group.CONTROL, False)],
        control_healthy=counts[(Group.CONTROL, True)],
    )
