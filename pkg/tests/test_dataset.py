import numpy as np
import pytest

from dp_expr.dataset import (
    Group,
    GroupAssignment,
    make_matrix,
    split_by_group,
    validate,
)
from dp_expr.errors import (
    DuplicateId,
    EmptyGroup,
    NonFiniteValue,
    NonPositiveValue,
)


def test_minimal_valid_matrix():
    m = make_matrix(["p"], ["G"], ["s1", "s2"], [[1.0, 2.0]],
                    [Group.CASE, Group.CONTROL])
    assert m.p == 1 and m.m == 1 and m.n == 1


def test_zero_value_rejected():
    with pytest.raises(NonPositiveValue) as exc:
        make_matrix(["p"], ["G"], ["s1", "s2"], [[0.0, 2.0]],
                    [Group.CASE, Group.CONTROL])
    assert exc.value.probe_id == "p" and exc.value.sample_id == "s1"


def test_negative_value_rejected():
    with pytest.raises(NonPositiveValue):
        make_matrix(["p"], ["G"], ["s1", "s2"], [[1.0, -3.0]],
                    [Group.CASE, Group.CONTROL])


def test_nan_and_inf_rejected():
    for bad in (float("nan"), float("inf")):
        with pytest.raises(NonFiniteValue):
            make_matrix(["p"], ["G"], ["s1", "s2"], [[1.0, bad]],
                        [Group.CASE, Group.CONTROL])


def test_empty_case_group_rejected():
    with pytest.raises(EmptyGroup):
        make_matrix(["p"], ["G"], ["s1", "s2"], [[1.0, 2.0]],
                    [Group.CONTROL, Group.CONTROL])


def test_duplicate_ids_rejected():
    with pytest.raises(DuplicateId):
        make_matrix(["p", "p"], ["G1", "G2"], ["s1", "s2"],
                    [[1.0, 2.0], [3.0, 4.0]],
                    [Group.CASE, Group.CONTROL])
    with pytest.raises(DuplicateId):
        make_matrix(["p"], ["G"], ["s1", "s1"], [[1.0, 2.0]],
                    [Group.CASE, Group.CONTROL])


def test_split_preserves_column_order():
    m = make_matrix(["p"], ["G"], ["c1", "c2", "c3"],
                    [[1.0, 2.0, 3.0]],
                    [Group.CASE, Group.CONTROL, Group.CASE])
    cases, controls = split_by_group(m)
    assert cases.tolist() == [[1.0, 3.0]]
    assert controls.tolist() == [[2.0]]


def test_split_2x4():
    m = make_matrix(["p1", "p2"], ["G1", "G2"], ["a", "b", "c", "d"],
                    [[1, 2, 3, 4], [5, 6, 7, 8]],
                    [Group.CASE, Group.CASE, Group.CONTROL, Group.CONTROL])
    cases, controls = split_by_group(m)
    assert cases.shape == (2, 2) and controls.shape == (2, 2)


def test_split_concat_is_column_permutation():
    rng = np.random.default_rng(3)
    values = rng.uniform(0.5, 5.0, size=(4, 6))
    groups = [Group.CASE, Group.CONTROL, Group.CASE, Group.CONTROL,
              Group.CONTROL, Group.CASE]
    m = make_matrix([f"p{i}" for i in range(4)],
                    [f"G{i}" for i in range(4)],
                    [f"s{i}" for i in range(6)], values, groups)
    cases, controls = split_by_group(m)
    recombined = np.hstack([cases, controls])
    original_cols = {tuple(values[:, j]) for j in range(6)}
    recombined_cols = {tuple(recombined[:, j]) for j in range(6)}
    assert original_cols == recombined_cols


def test_validate_idempotent(tiny_matrix):
    assert validate(tiny_matrix) is tiny_matrix
    assert validate(validate(tiny_matrix)) is tiny_matrix


def test_values_are_frozen(tiny_matrix):
    with pytest.raises(ValueError):
        tiny_matrix.values[0, 0] = 99.0


def test_group_assignment_disjointness():
    with pytest.raises(DuplicateId):
        GroupAssignment(frozenset({"a", "b"}), frozenset({"b"}))
    with pytest.raises(EmptyGroup):
        GroupAssignment(frozenset(), frozenset({"b"}))
