"""Two-group expression matrices.

An ExpressionMatrix holds the probes x samples table together with the
case/control split. Values must be finite and strictly positive: the
classifier divides by them, so zeros are rejected up front rather than
surfacing later as infinities. Instances are immutable after validation
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DuplicateId,
    EmptyGroup,
    InputError,
    NonFiniteValue,
    NonPositiveValue,
)


class Group(str, Enum):
    CASE = "case"
    CONTROL = "control"


@dataclass(frozen=True)
class GroupAssignment:
    """Which sample ids are cases and which are controls."""

    case_sample_ids: frozenset[str]
    control_sample_ids: frozenset[str]

    def __post_init__(self):
        overlap = self.case_sample_ids & self.control_sample_ids
        if overlap:
            raise DuplicateId("group sample", sorted(overlap)[0])
        if not self.case_sample_ids:
            raise EmptyGroup(Group.CASE.value)
        if not self.control_sample_ids:
            raise EmptyGroup(Group.CONTROL.value)


@dataclass(frozen=True)
class ExpressionMatrix:
    """Probes x samples matrix of positive expression values.

    ``values`` has one row per probe and one column per sample; ``groups``
    labels each column. Construct via :func:`validate` (or any ingest
    routine, which validates for you).
    """

    probe_ids: tuple[str, ...]
    probe_identifiers: tuple[str, ...]
    sample_ids: tuple[str, ...]
    values: np.ndarray
    groups: tuple[Group, ...]

    @property
    def p(self) -> int:
        return len(self.probe_ids)

    @property
    def m(self) -> int:
        return sum(1 for g in self.groups if g is Group.CASE)

    @property
    def n(self) -> int:
        return sum(1 for g in self.groups if g is Group.CONTROL)

    @property
    def case_columns(self) -> list[int]:
        return [i for i, g in enumerate(self.groups) if g is Group.CASE]

    @property
    def control_columns(self) -> list[int]:
        return [i for i, g in enumerate(self.groups) if g is Group.CONTROL]


def make_matrix(probe_ids, probe_identifiers, sample_ids, values, groups
                ) -> ExpressionMatrix:
    """Build and validate an ExpressionMatrix from plain sequences."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    matrix = ExpressionMatrix(
        probe_ids=tuple(str(x) for x in probe_ids),
        probe_identifiers=tuple(str(x) for x in probe_identifiers),
        sample_ids=tuple(str(x) for x in sample_ids),
        values=arr,
        groups=tuple(Group(g) for g in groups),
    )
    return validate(matrix)


def validate(matrix: ExpressionMatrix) -> ExpressionMatrix:
    """Check all invariants; return the matrix unchanged if they hold.

    Raises NonPositiveValue, NonFiniteValue, DuplicateId or EmptyGroup,
    naming the offending probe/sample where applicable. Idempotent.
    """
    v = matrix.values
    if v.ndim != 2:
        raise InputError(f"values must be 2-dimensional, got shape {v.shape}")
    p, cols = v.shape
    if p != len(matrix.probe_ids) or p != len(matrix.probe_identifiers):
        raise InputError(
            f"{p} value rows but {len(matrix.probe_ids)} probe ids and "
            f"{len(matrix.probe_identifiers)} identifiers")
    if cols != len(matrix.sample_ids) or cols != len(matrix.groups):
        raise InputError(
            f"{cols} value columns but {len(matrix.sample_ids)} sample ids "
            f"and {len(matrix.groups)} group labels")
    if p < 1:
        raise InputError("matrix has no probes")

    if matrix.m < 1:
        raise EmptyGroup(Group.CASE.value)
    if matrix.n < 1:
        raise EmptyGroup(Group.CONTROL.value)

    _check_unique(matrix.probe_ids, "probe")
    _check_unique(matrix.sample_ids, "sample")

    bad = ~np.isfinite(v)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteValue(matrix.probe_ids[i], matrix.sample_ids[j],
                             float(v[i, j]))
    nonpos = v <= 0.0
    if nonpos.any():
        i, j = np.argwhere(nonpos)[0]
        raise NonPositiveValue(matrix.probe_ids[i], matrix.sample_ids[j],
                               float(v[i, j]))

    if not v.flags.writeable:
        return matrix
    v.flags.writeable = False
    return matrix


def split_by_group(matrix: ExpressionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Column-partition the values into (case block, control block).

    Columns keep their original relative order within each group; rows are
    untouched. Returns plain arrays of shape (p, m) and (p, n).
    """
    return (matrix.values[:, matrix.case_columns],
            matrix.values[:, matrix.control_columns])


def _check_unique(ids, kind):
    seen = set()
    for x in ids:
        if x in seen:
            raise DuplicateId(kind, x)
        seen.add(x)
