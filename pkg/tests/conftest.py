"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own code paths:
pair counting is a plain double loop, predictive sampling composes the
mixture by hand from the base quantile and the atom table, and the
cross-validation oracle re-derives thresholds from sorted plain-Python
lists.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from dp_expr.dataset import Group, make_matrix


def brute_force_leq_fraction(x, y):
    """Tie-inclusive pair fraction by explicit double loop."""
    count = 0
    for xi in x:
        for yj in y:
            if xi <= yj:
                count += 1
    return count / (len(x) * len(y))


def sample_predictive(pcdf, size, rng):
    """Draw from a mixture CDF using only its public fields."""
    out = np.empty(size)
    from_base = rng.random(size) < pcdf.base_weight
    n_base = int(from_base.sum())
    if n_base:
        out[from_base] = pcdf.base.quantile(rng.random(n_base))
    n_atom = size - n_base
    if n_atom:
        masses = pcdf.masses / pcdf.masses.sum()
        out[~from_base] = rng.choice(pcdf.locations, size=n_atom, p=masses)
    return out


def monte_carlo_prob_leq(fhat, ghat, draws, seed):
    rng = np.random.default_rng(seed)
    x = sample_predictive(fhat, draws, rng)
    y = sample_predictive(ghat, draws, rng)
    return float(np.mean(x <= y))


def random_two_group_matrix(rng, p=None, m=None, n=None, with_ties=True):
    """Random positive matrix; optionally draw from a small value grid to
    force ties within and across groups."""
    p = p if p is not None else int(rng.integers(1, 51))
    m = m if m is not None else int(rng.integers(1, 21))
    n = n if n is not None else int(rng.integers(1, 21))
    if with_ties:
        grid = rng.uniform(0.1, 10.0, size=max(2, (m + n) // 2))
        values = rng.choice(grid, size=(p, m + n))
    else:
        values = rng.uniform(0.1, 10.0, size=(p, m + n))
    return make_matrix(
        [f"probe{j}" for j in range(p)],
        [f"GENE{j}" for j in range(p)],
        [f"s{i}" for i in range(m + n)],
        values,
        [Group.CASE] * m + [Group.CONTROL] * n,
    )


def soft_text(probes, samples, subsets, dataset_id="GDS0001",
              extra_lines=(), header=None):
    """Assemble a SOFT document from rows and subset definitions.

    probes: list of (probe_id, identifier, [values as str or float])
    subsets: list of (subset_id, description, [sample ids])
    """
    lines = ["^DATABASE = GeoMiniml", "!Database_name = synthetic",
             f"^DATASET = {dataset_id}", "!dataset_title = synthetic"]
    for sid, desc, ids in subsets:
        lines += [f"^SUBSET = {sid}",
                  f"!subset_description = {desc}",
                  f"!subset_sample_id = {','.join(ids)}",
                  "!subset_type = protocol"]
    lines += [f"^DATASET = {dataset_id}", "!dataset_table_begin"]
    lines.append(header if header is not None
                 else "\t".join(["ID_REF", "IDENTIFIER"] + list(samples)))
    for probe_id, ident, values in probes:
        cells = [probe_id, ident] + [v if isinstance(v, str) else f"{v:.17g}"
                                     for v in values]
        lines.append("\t".join(cells))
    lines.append("!dataset_table_end")
    lines.extend(extra_lines)
    return "\n".join(lines) + "\n"


@pytest.fixture
def tiny_matrix():
    """3 probes, 2 cases, 3 controls; probe0 down in cases, probe2 up."""
    values = np.array([
        [1.0, 2.0, 5.0, 6.0, 7.0],
        [4.0, 3.0, 3.5, 2.0, 5.0],
        [9.0, 8.0, 2.0, 1.5, 2.5],
    ])
    return make_matrix(
        ["probe0", "probe1", "probe2"],
        ["GENE0", "GENE1", "GENE2"],
        ["s0", "s1", "s2", "s3", "s4"],
        values,
        [Group.CASE, Group.CASE, Group.CONTROL, Group.CONTROL,
         Group.CONTROL],
    )


@pytest.fixture
def mini_soft_text():
    samples = ["GSM1", "GSM2", "GSM3", "GSM4"]
    probes = [("p1", "GENEA", [1.5, 2.5, 3.5, 4.5]),
              ("p2", "GENEB", [4.0, 3.0, 2.0, 1.0])]
    subsets = [("GDS0001_1", "treated", ["GSM1", "GSM2"]),
               ("GDS0001_2", "untreated", ["GSM3", "GSM4"])]
    return soft_text(probes, samples, subsets)


def gds3713_path():
    """Local copy of the GDS3713 SOFT file, if present."""
    env = os.environ.get("DP_EXPR_GDS3713")
    candidates = [env] if env else []
    here = Path(__file__).resolve().parent.parent
    candidates += [here / "data" / "GDS3713.soft",
                   here / "data" / "GDS3713.soft.gz"]
    for cand in candidates:
        if cand and Path(cand).is_file():
            return Path(cand)
    return None


def require_gds3713():
    path = gds3713_path()
    if path is None:
        pytest.skip("GDS3713.soft not available locally (set "
                    "DP_EXPR_GDS3713 or place it under data/)")
    return path
