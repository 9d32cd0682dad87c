"""GEO SOFT (GDS) and plain TSV ingestion.

The SOFT expression table is the block strictly between the
``!dataset_table_begin`` and ``!dataset_table_end`` marker lines, first
block line being the tab-separated header (ID_REF, IDENTIFIER, one GSM
column per sample). Sample groups come from ``^SUBSET`` stanzas
(``!subset_description`` / ``!subset_sample_id``). Gzip input is
detected by magic bytes and decompressed transparently.

Missing values ("null", empty cells, NaN and other non-finite text) are
ingest errors with a line/column report; drop_incomplete instead removes
the affected probe rows and logs how many. There is no imputation.

A line-window mode bypasses the structural parse and reads an explicit
1-based inclusive line range as raw table rows (no header); sample ids
are then synthesized from raw tab-column positions (c2, c3, ...) so that
positional group selection can address them.
"""

from __future__ import annotations

import gzip
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import ExpressionMatrix, Group, GroupAssignment, make_matrix
from .errors import (
    InputError,
    MissingSubset,
    MissingTableMarkers,
    RaggedRow,
    UnknownSampleId,
    UnparseableValue,
)

logger = logging.getLogger(__name__)

_TABLE_BEGIN = "!dataset_table_begin"
_TABLE_END = "!dataset_table_end"


def _entity(line: str) -> tuple[str, str]:
    """Split '^KEY = value' into (KEY, value)."""
    body = line[1:]
    if "=" in body:
        key, value = body.split("=", 1)
        return key.strip(), value.strip()
    return body.strip(), ""


def _attribute(line: str) -> tuple[str, str]:
    """Split '!key = value' into (key, value)."""
    return _entity(line)


@dataclass(frozen=True)
class SoftSubset:
    subset_id: str
    description: str
    sample_ids: tuple[str, ...]


@dataclass(frozen=True)
class SoftDataset:
    """A parsed expression table plus its sample subsets."""

    dataset_id: str
    table_header: tuple[str, ...]
    probe_ids: tuple[str, ...]
    identifiers: tuple[str, ...]
    values: np.ndarray
    subsets: tuple[SoftSubset, ...]
    dropped_probes: int = 0

    @property
    def sample_ids(self) -> tuple[str, ...]:
        return self.table_header[2:]


def parse_soft(source, line_window: Optional[tuple[int, int]] = None,
               drop_incomplete: bool = False) -> SoftDataset:
    """Parse SOFT text (path, text, or binary/gzip stream).

    With ``line_window=(a, b)`` only lines a..b (1-based, inclusive) are
    read, every one as a raw tab-separated table row.
    """
    lines = _read_lines(source)
    if line_window is not None:
        return _parse_window(lines, line_window, drop_incomplete)

    dataset_id = ""
    subsets: list[SoftSubset] = []
    current: Optional[dict] = None
    begin_idx = end_idx = None

    def finish_current():
        if current is not None:
            subsets.append(SoftSubset(
                subset_id=current["id"],
                description=current.get("description", ""),
                sample_ids=tuple(current.get("sample_ids", ())),
            ))

    i = 0
    while i < len(lines):
        line = lines[i]
        if line == _TABLE_BEGIN:
            begin_idx = i
            break
        if line.startswith("^"):
            finish_current()
            current = None
            key, value = _entity(line)
            if key == "SUBSET":
                current = {"id": value}
            elif key == "DATASET" and not dataset_id:
                dataset_id = value
        elif line.startswith("!") and current is not None:
            key, value = _attribute(line)
            if key == "subset_description":
                current["description"] = value
            elif key == "subset_sample_id":
                ids = [s.strip() for s in value.split(",") if s.strip()]
                current.setdefault("sample_ids", []).extend(ids)
        i += 1
    finish_current()

    if begin_idx is None:
        raise MissingTableMarkers(_TABLE_BEGIN)
    for j in range(begin_idx + 1, len(lines)):
        if lines[j] == _TABLE_END:
            end_idx = j
            break
    if end_idx is None:
        raise MissingTableMarkers(_TABLE_END)
    if end_idx - begin_idx < 2:
        raise InputError("dataset table block is empty")

    header = tuple(lines[begin_idx + 1].split("\t"))
    if len(header) < 3 or header[0] != "ID_REF" or header[1] != "IDENTIFIER":
        raise InputError(
            "table header must begin with ID_REF<TAB>IDENTIFIER followed "
            "by sample columns")

    probe_ids, identifiers, values, dropped = _parse_rows(
        lines, begin_idx + 2, end_idx, len(header), drop_incomplete)

    ds = SoftDataset(
        dataset_id=dataset_id,
        table_header=header,
        probe_ids=probe_ids,
        identifiers=identifiers,
        values=values,
        subsets=tuple(subsets),
        dropped_probes=dropped,
    )
    known = set(ds.sample_ids)
    for subset in ds.subsets:
        for sid in subset.sample_ids:
            if sid not in known:
                raise UnknownSampleId(sid)
    return ds


def _parse_window(lines, window, drop_incomplete) -> SoftDataset:
    a, b = window
    if a < 1 or b < a:
        raise InputError(f"line window must satisfy 1 <= A <= B, got "
                         f"{a},{b}")
    stop = min(b, len(lines))  # read-to-EOF, like a line-gated read loop
    if a > stop:
        raise InputError(f"line window {a},{b} starts beyond the input "
                         f"({len(lines)} lines)")
    first = lines[a - 1].split("\t")
    if len(first) < 3:
        raise RaggedRow(a, 3, len(first))
    ncols = len(first)
    header = ("ID_REF", "IDENTIFIER") + tuple(
        f"c{i}" for i in range(2, ncols))
    probe_ids, identifiers, values, dropped = _parse_rows(
        lines, a - 1, stop, ncols, drop_incomplete)
    return SoftDataset(dataset_id="", table_header=header,
                       probe_ids=probe_ids, identifiers=identifiers,
                       values=values, subsets=(), dropped_probes=dropped)


def _parse_rows(lines, start, stop, ncols, drop_incomplete):
    """Parse table rows at lines[start:stop]; line numbers are 1-based."""
    probe_ids: list[str] = []
    identifiers: list[str] = []
    rows: list[np.ndarray] = []
    dropped = 0
    for idx in range(start, stop):
        cells = lines[idx].split("\t")
        if len(cells) != ncols:
            raise RaggedRow(idx + 1, ncols, len(cells))
        try:
            vals = np.array(cells[2:], dtype=np.float64)
            bad = np.flatnonzero(~np.isfinite(vals))
            bad_col = int(bad[0]) + 2 if bad.size else None
        except ValueError:
            bad_col = next(i for i, c in enumerate(cells[2:], start=2)
                           if not _is_finite_number(c))
        if bad_col is not None:
            if drop_incomplete:
                dropped += 1
                continue
            raise UnparseableValue(idx + 1, bad_col + 1, cells[bad_col])
        probe_ids.append(cells[0])
        identifiers.append(cells[1])
        rows.append(vals)
    if dropped:
        logger.warning("dropped %d probe rows with missing or unparseable "
                       "values", dropped)
    if not rows:
        raise InputError("no usable probe rows in table")
    return (tuple(probe_ids), tuple(identifiers),
            np.vstack(rows), dropped)


def _is_finite_number(text: str) -> bool:
    try:
        return bool(np.isfinite(float(text)))
    except ValueError:
        return False


def parse_tsv_matrix(source, drop_incomplete: bool = False) -> SoftDataset:
    """Parse a plain TSV matrix: probe_id [identifier] sample columns.

    The identifier column is recognized by its header name; without one,
    identifiers default to the probe ids.
    """
    lines = _read_lines(source)
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise InputError("empty TSV input")
    header_cells = lines[0].split("\t")
    if len(header_cells) < 2:
        raise InputError("TSV header needs a probe column and at least "
                         "one sample column")
    has_identifier = (len(header_cells) >= 3
                      and header_cells[1].lower() == "identifier")
    sample_ids = tuple(header_cells[2:] if has_identifier
                       else header_cells[1:])
    if not sample_ids:
        raise InputError("TSV header has no sample columns")

    probe_ids: list[str] = []
    identifiers: list[str] = []
    rows: list[np.ndarray] = []
    dropped = 0
    ncols = len(header_cells)
    first_value_col = 2 if has_identifier else 1
    for idx, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != ncols:
            raise RaggedRow(idx, ncols, len(cells))
        value_cells = cells[first_value_col:]
        bad_col = next((i for i, c in enumerate(value_cells,
                                                start=first_value_col)
                        if not _is_finite_number(c)), None)
        if bad_col is not None:
            if drop_incomplete:
                dropped += 1
                continue
            raise UnparseableValue(idx, bad_col + 1, cells[bad_col])
        probe_ids.append(cells[0])
        identifiers.append(cells[1] if has_identifier else cells[0])
        rows.append(np.array(value_cells, dtype=np.float64))
    if dropped:
        logger.warning("dropped %d probe rows with missing or unparseable "
                       "values", dropped)
    if not rows:
        raise InputError("no usable probe rows in TSV input")

    header = ("ID_REF", "IDENTIFIER") + sample_ids
    return SoftDataset(dataset_id="", table_header=header,
                       probe_ids=tuple(probe_ids),
                       identifiers=tuple(identifiers),
                       values=np.vstack(rows), subsets=(),
                       dropped_probes=dropped)


def load_table(source, line_window=None, drop_incomplete=False
               ) -> SoftDataset:
    """Parse SOFT or TSV input, sniffing the format from the first line."""
    lines = _read_lines(source)
    if line_window is not None:
        return _parse_window(lines, line_window, drop_incomplete)
    first = next((ln for ln in lines if ln.strip()), "")
    if first.startswith("^") or first.startswith("!"):
        return parse_soft(lines, drop_incomplete=drop_incomplete)
    return parse_tsv_matrix(lines, drop_incomplete=drop_incomplete)


def table_to_tsv(ds: SoftDataset) -> str:
    """Emit the expression table back to TSV with round-tripping floats."""
    out = ["\t".join(ds.table_header)]
    for i in range(len(ds.probe_ids)):
        cells = [ds.probe_ids[i], ds.identifiers[i]]
        cells.extend(f"{v:.17g}" for v in ds.values[i])
        out.append("\t".join(cells))
    return "\n".join(out) + "\n"


def to_matrix(ds: SoftDataset, groups: GroupAssignment) -> ExpressionMatrix:
    """Select grouped sample columns into a validated ExpressionMatrix.

    Case columns keep their file order, then control columns keep
    theirs; table columns assigned to neither group are left out.
    """
    known = set(ds.sample_ids)
    for sid in sorted(groups.case_sample_ids | groups.control_sample_ids):
        if sid not in known:
            raise UnknownSampleId(sid)
    case_cols = [i for i, s in enumerate(ds.sample_ids)
                 if s in groups.case_sample_ids]
    control_cols = [i for i, s in enumerate(ds.sample_ids)
                    if s in groups.control_sample_ids]
    sample_ids = [ds.sample_ids[i] for i in case_cols + control_cols]
    labels = [Group.CASE] * len(case_cols) + \
             [Group.CONTROL] * len(control_cols)
    return make_matrix(ds.probe_ids, ds.identifiers, sample_ids,
                       ds.values[:, case_cols + control_cols], labels)


def subset_sample_ids(ds: SoftDataset, spec: str) -> frozenset[str]:
    """Sample ids selected by a subset id, a subset description, or a
    positional ``cols:A-B`` range over raw tab columns."""
    if spec.startswith("cols:"):
        rng = spec[len("cols:"):]
        try:
            a_txt, b_txt = rng.split("-", 1)
            a, b = int(a_txt), int(b_txt)
        except ValueError:
            raise InputError(f"bad cols range {spec!r}; expected cols:A-B")
        if a < 2 or b < a:
            raise InputError(f"cols range must satisfy 2 <= A <= B, got "
                             f"{spec!r}")
        header_len = len(ds.table_header)
        if b >= header_len:
            raise InputError(
                f"cols range {spec!r} exceeds the table width "
                f"{header_len}")
        return frozenset(ds.table_header[i] for i in range(a, b + 1))
    for subset in ds.subsets:
        if spec in (subset.subset_id, subset.description):
            return frozenset(subset.sample_ids)
    raise MissingSubset(spec)


def group_assignment_from_subsets(ds: SoftDataset, case_spec: str,
                                  control_spec: str) -> GroupAssignment:
    return GroupAssignment(
        case_sample_ids=subset_sample_ids(ds, case_spec),
        control_sample_ids=subset_sample_ids(ds, control_spec),
    )


def parse_group_sidecar(source) -> GroupAssignment:
    """Read a sidecar of lines ``sample_id<TAB>case|control``."""
    lines = _read_lines(source)
    cases: set[str] = set()
    controls: set[str] = set()
    for idx, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise RaggedRow(idx, 2, len(cells))
        sid, label = cells[0].strip(), cells[1].strip().lower()
        if label == "case":
            cases.add(sid)
        elif label == "control":
            controls.add(sid)
        else:
            raise InputError(f"line {idx}: group label must be 'case' or "
                             f"'control', got {cells[1]!r}")
    return GroupAssignment(case_sample_ids=frozenset(cases),
                           control_sample_ids=frozenset(controls))


def _read_lines(source) -> list[str]:
    """Text lines from a path, bytes, file object, or pre-split list;
    gzip is sniffed from magic bytes. str and Path name files."""
    if isinstance(source, list):
        return source
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            return data.splitlines()
    else:
        raise InputError(f"cannot read input of type {type(source)!r}")
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data.decode("utf-8", errors="replace").splitlines()
