"""Probe ranking by predictive probability and signature panel selection.

Each probe gets the probability that a future case observation at that
probe is <= a future control observation. Probes are ordered by that
probability, largest first (case expression stochastically smallest
first), with ties broken by ascending original probe index; the stable
descending sort over input order makes the ranking reproducible
bit-for-bit. The signature panel takes the first k positions of the
ranking (down-regulated in cases) and the last k positions in reverse
(up-regulated).

In the weak-prior limit the per-probe probability is count/(m*n) with an
integer count, so ranking comparisons are done on the integer counts:
equal probabilities are exactly equal, never float-fuzzy.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from . import dp_core
from .dataset import ExpressionMatrix, split_by_group
from .dp_core import DEFAULT_QUADRATURE, DPConfig, QuadratureSpec
from .errors import DpExprError, InputError, NumericalError, PanelTooLarge

# cap on boolean comparison elements materialized per chunk
_CHUNK_ELEMENTS = 8_000_000


@dataclass(frozen=True)
class ProbeRanking:
    """Per-probe probabilities and the descending order over probes.

    ``order[i]`` is the probe index at rank position i. ``pair_counts``
    holds the exact integer pair counts in the weak-prior case (None for
    DP-smoothed rankings).
    """

    q: np.ndarray
    order: np.ndarray
    pair_counts: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SignaturePanel:
    """First-k / last-k probe indices of a ranking.

    down[i] is the probe at rank position i; up[i] the probe at rank
    position p-1-i, so up runs from the very bottom of the ranking
    upward.
    """

    k: int
    down: tuple[int, ...]
    up: tuple[int, ...]


def rank_probes(matrix: ExpressionMatrix, config: DPConfig,
                quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
                threads: int = 1,
                per_probe: Optional[Mapping[int, DPConfig]] = None
                ) -> ProbeRanking:
    """Compute per-probe probabilities and their descending ranking.

    ``per_probe`` optionally overrides the shared config for individual
    probe indices. Output is deterministic and independent of
    ``threads``.
    """
    cases, controls = split_by_group(matrix)
    p = matrix.p

    if config.weak_prior and not per_probe:
        counts = _pair_counts_all(cases, controls, threads)
        q = counts / (matrix.m * matrix.n)
        # integer keys make ties exact; stable sort keeps file order
        order = np.lexsort((np.arange(p), -counts))
        return ProbeRanking(q=q, order=order, pair_counts=counts)

    q = np.empty(p, dtype=np.float64)
    counts = np.full(p, -1, dtype=np.int64) if config.weak_prior else None

    def one_probe(j):
        cfg = per_probe.get(j, config) if per_probe else config
        try:
            if cfg.weak_prior:
                c = dp_core.leq_pair_count(cases[j], controls[j])
                if counts is not None:
                    counts[j] = c
                q[j] = c / (cases.shape[1] * controls.shape[1])
            else:
                fhat = dp_core.posterior_predictive_cdf(
                    cases[j], cfg.c, cfg.f0)
                ghat = dp_core.posterior_predictive_cdf(
                    controls[j], cfg.d, cfg.g0)
                q[j] = dp_core.prob_leq(fhat, ghat, quadrature)
        except DpExprError as e:
            kind = NumericalError if isinstance(e, NumericalError) \
                else InputError
            raise kind(f"probe {j} ({matrix.probe_ids[j]}): {e}") from e

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(one_probe, j) for j in range(p)]:
                f.result()
    else:
        for j in range(p):
            one_probe(j)

    if counts is not None and np.all(counts >= 0):
        order = np.lexsort((np.arange(p), -counts))
        return ProbeRanking(q=q, order=order, pair_counts=counts)
    order = np.lexsort((np.arange(p), -q))
    return ProbeRanking(q=q, order=order)


def _pair_counts_all(cases: np.ndarray, controls: np.ndarray,
                     threads: int) -> np.ndarray:
    """Tie-inclusive pair counts for every probe row, vectorized."""
    p, m = cases.shape
    n = controls.shape[1]
    counts = np.empty(p, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, m * n))
    spans = [(s, min(s + chunk, p)) for s in range(0, p, chunk)]

    def run(span):
        s, e = span
        block = cases[s:e, :, None] <= controls[s:e, None, :]
        counts[s:e] = block.sum(axis=(1, 2), dtype=np.int64)

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(run, sp) for sp in spans]:
                f.result()
    else:
        for sp in spans:
            run(sp)
    return counts


def select_panel(ranking: ProbeRanking, k: int) -> SignaturePanel:
    """First k and last k rank positions as the signature panel."""
    p = ranking.order.size
    if k < 1:
        raise InputError(f"panel size k must be >= 1, got {k}")
    if 2 * k > p:
        raise PanelTooLarge(k, p)
    order = ranking.order
    down = tuple(int(order[i]) for i in range(k))
    up = tuple(int(order[p - 1 - i]) for i in range(k))
    return SignaturePanel(k=k, down=down, up=up)
