"""Batch command-line interface.

Subcommands: rank, panel, fit, classify, cv, select-k. Every run is
described by a RunManifest built from the flags; the manifest determines
the outputs completely, so re-running a command on the same inputs
produces byte-identical files. Human-readable tables go to stdout;
--format tsv|json writes a machine report to --out.

Exit codes: 0 success, 2 input or parse error, 3 numerical failure,
4 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import classifier, crossval, diffexpr, soft_ingest
from .dataset import ExpressionMatrix
from .diffexpr import SignaturePanel
from .dp_core import (
    DPConfig,
    lognormal_base,
    normal_base,
    uniform_base,
)
from .errors import (
    DpExprError,
    InputError,
    MissingProbe,
    NonPositiveExpression,
    NumericalError,
    UsageError,
)
from .report import (
    confusion_block,
    fmt_human,
    render_json,
    render_table,
    render_tsv,
)

MODEL_FORMAT = "dp-expr-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines a run's outputs.

    ``threads``, ``output_format`` and ``out`` are execution and
    presentation details: they are carried for reproducibility of the
    invocation but excluded from the manifest hash, which covers only
    analysis-affecting fields.
    """

    command: str
    input: str
    groups_file: Optional[str] = None
    case_subset: Optional[str] = None
    control_subset: Optional[str] = None
    weak_prior: bool = True
    concentration_c: float = 0.0
    concentration_d: float = 0.0
    base: Optional[str] = None
    k: Optional[int] = None
    k_max: Optional[int] = None
    refit_panel: bool = False
    line_window: Optional[tuple[int, int]] = None
    drop_incomplete_probes: bool = False
    seed: int = 0
    model_file: Optional[str] = None
    threads: int = 1
    output_format: Optional[str] = None
    out: Optional[str] = None

    _UNHASHED = ("threads", "output_format", "out")

    def hashed_dict(self) -> dict:
        d = asdict(self)
        for key in self._UNHASHED:
            d.pop(key)
        if d["line_window"] is not None:
            d["line_window"] = list(d["line_window"])
        return d

    def sha256(self) -> str:
        canonical = json.dumps(self.hashed_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        if d.get("line_window") is not None:
            d["line_window"] = tuple(d["line_window"])
        return cls(**d)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dp-expr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("rank", "rank all probes by predictive probability"),
        ("panel", "show the k-pair signature panel"),
        ("fit", "fit a classifier and serialize it"),
        ("classify", "classify new individuals with a fitted model"),
        ("cv", "leave-one-out cross-validation at one panel size"),
        ("select-k", "choose the panel size by cross-validation"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p, name)
    return parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser, command: str) -> None:
    p.add_argument("--input", required=True,
                   help="SOFT (optionally .gz) or TSV matrix; for "
                        "classify: TSV of new individuals")
    p.add_argument("--groups", help="sidecar file of sample_id<TAB>"
                                    "case|control lines")
    p.add_argument("--case-subset",
                   help="SOFT subset id/description (or cols:A-B) for the "
                        "case group")
    p.add_argument("--control-subset",
                   help="SOFT subset id/description (or cols:A-B) for the "
                        "control group")
    p.add_argument("--weak-prior", action="store_true",
                   help="zero-concentration limit (default unless DP "
                        "options are given)")
    p.add_argument("--concentration-c", type=float, default=None,
                   help="case-group DP concentration")
    p.add_argument("--concentration-d", type=float, default=None,
                   help="control-group DP concentration")
    p.add_argument("--base", default=None,
                   help="base distribution: normal:mu,sigma | "
                        "uniform:a,b | lognormal:mu,sigma")
    if command in ("panel", "fit", "cv"):
        p.add_argument("--k", type=int, required=True,
                       help="number of down/up probe pairs")
    if command == "select-k":
        p.add_argument("--k-max", type=int, required=True,
                       help="largest panel size to evaluate")
    if command == "classify":
        p.add_argument("--model", required=True,
                       help="model JSON written by fit")
    p.add_argument("--format", choices=("tsv", "json"), default=None,
                   help="machine output format (written to --out)")
    p.add_argument("--out", default=None, help="machine output path")
    p.add_argument("--threads", type=int, default=1,
                   help="per-probe parallelism; output is identical for "
                        "any value")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--oracle-faithful", action="store_true",
                      help="keep the full-data panel inside LOOCV folds "
                           "(default)")
    mode.add_argument("--refit-panel", action="store_true",
                      help="recompute ranking and panel inside every "
                           "LOOCV fold")
    p.add_argument("--line-window", default=None, metavar="A,B",
                   help="read only lines A..B as raw table rows")
    p.add_argument("--drop-incomplete-probes", action="store_true",
                   help="drop probe rows with missing values instead of "
                        "failing")
    p.add_argument("--seed", type=int, default=0,
                   help="seed recorded in the manifest")


def _manifest_from_args(args) -> RunManifest:
    window = None
    if args.line_window:
        try:
            a_txt, b_txt = args.line_window.split(",", 1)
            window = (int(a_txt), int(b_txt))
        except ValueError:
            raise UsageError(f"--line-window expects A,B integers, got "
                             f"{args.line_window!r}")
    dp_given = (args.concentration_c is not None
                or args.concentration_d is not None
                or args.base is not None)
    if args.weak_prior and dp_given:
        raise UsageError("--weak-prior contradicts --concentration-c/"
                         "--concentration-d/--base")
    weak = not dp_given
    if args.format is None and args.out is not None \
            and args.command != "fit":
        raise UsageError("--out needs --format tsv|json")
    if args.format is not None and args.out is None:
        raise UsageError("--format needs --out")
    return RunManifest(
        command=args.command,
        input=args.input,
        groups_file=args.groups,
        case_subset=args.case_subset,
        control_subset=args.control_subset,
        weak_prior=weak,
        concentration_c=args.concentration_c or 0.0,
        concentration_d=args.concentration_d or 0.0,
        base=args.base,
        k=getattr(args, "k", None),
        k_max=getattr(args, "k_max", None),
        refit_panel=args.refit_panel,
        line_window=window,
        drop_incomplete_probes=args.drop_incomplete_probes,
        seed=args.seed,
        model_file=getattr(args, "model", None),
        threads=args.threads,
        output_format=args.format,
        out=args.out,
    )


def _parse_base_spec(spec: str):
    try:
        kind, params = spec.split(":", 1)
        values = [float(x) for x in params.split(",")]
    except ValueError:
        raise UsageError(f"bad base spec {spec!r}")
    makers = {"normal": normal_base, "uniform": uniform_base,
              "lognormal": lognormal_base}
    if kind not in makers or len(values) != 2:
        raise UsageError(f"bad base spec {spec!r}; expected "
                         f"normal:mu,sigma | uniform:a,b | "
                         f"lognormal:mu,sigma")
    return makers[kind](*values)


def _dp_config(manifest: RunManifest) -> DPConfig:
    if manifest.weak_prior:
        return DPConfig()
    base = _parse_base_spec(manifest.base) if manifest.base else None
    if (manifest.concentration_c > 0 or manifest.concentration_d > 0) \
            and base is None:
        raise UsageError("positive concentrations need --base")
    return DPConfig(c=manifest.concentration_c,
                    d=manifest.concentration_d,
                    f0=base, g0=base, weak_prior=False)


def _load_matrix(manifest: RunManifest) -> ExpressionMatrix:
    ds = soft_ingest.load_table(manifest.input,
                                line_window=manifest.line_window,
                                drop_incomplete=
                                manifest.drop_incomplete_probes)
    if manifest.case_subset or manifest.control_subset:
        if not (manifest.case_subset and manifest.control_subset):
            raise UsageError("--case-subset and --control-subset must be "
                             "given together")
        groups = soft_ingest.group_assignment_from_subsets(
            ds, manifest.case_subset, manifest.control_subset)
    elif manifest.groups_file:
        groups = soft_ingest.parse_group_sidecar(manifest.groups_file)
    else:
        raise UsageError("no group mapping: give --case-subset/"
                         "--control-subset or --groups")
    return soft_ingest.to_matrix(ds, groups)


def _write_machine(manifest: RunManifest, columns, rows, extra=None
                   ) -> None:
    if manifest.output_format is None:
        return
    if manifest.output_format == "tsv":
        text = render_tsv(columns, rows)
    else:
        document = {"command": manifest.command,
                    "manifest_sha256": manifest.sha256(),
                    "manifest": manifest.hashed_dict(),
                    "rows": rows}
        if extra:
            document.update(extra)
        text = render_json(document)
    Path(manifest.out).write_text(text)


def _ranking_rows(matrix, ranking):
    rows = []
    for position, j in enumerate(ranking.order, start=1):
        rows.append({"rank": position,
                     "probe_id": matrix.probe_ids[j],
                     "identifier": matrix.probe_identifiers[j],
                     "q": float(ranking.q[j])})
    return rows


def cmd_rank(manifest: RunManifest) -> None:
    matrix = _load_matrix(manifest)
    ranking = diffexpr.rank_probes(matrix, _dp_config(manifest),
                                   threads=manifest.threads)
    rows = _ranking_rows(matrix, ranking)
    sys.stdout.write(render_table(("rank", "probe_id", "identifier", "q"),
                                  rows, right_align=("rank", "q")))
    _write_machine(manifest, ("rank", "probe_id", "identifier", "q"), rows)


def cmd_panel(manifest: RunManifest) -> None:
    matrix = _load_matrix(manifest)
    ranking = diffexpr.rank_probes(matrix, _dp_config(manifest),
                                   threads=manifest.threads)
    panel = diffexpr.select_panel(ranking, manifest.k)
    rows = []
    for i in range(panel.k):
        d, u = panel.down[i], panel.up[i]
        rows.append({
            "pair": i + 1,
            "down_probe_id": matrix.probe_ids[d],
            "down_identifier": matrix.probe_identifiers[d],
            "down_q": float(ranking.q[d]),
            "up_probe_id": matrix.probe_ids[u],
            "up_identifier": matrix.probe_identifiers[u],
            "up_q": float(ranking.q[u]),
        })
    columns = ("pair", "down_probe_id", "down_identifier", "down_q",
               "up_probe_id", "up_identifier", "up_q")
    sys.stdout.write(render_table(columns, rows,
                                  right_align=("pair", "down_q", "up_q")))
    _write_machine(manifest, columns, rows)


def _panel_entries(matrix, ranking, panel, indices, positions):
    return [{"rank": int(pos) + 1,
             "index": int(j),
             "probe_id": matrix.probe_ids[j],
             "identifier": matrix.probe_identifiers[j],
             "q": float(ranking.q[j])}
            for j, pos in zip(indices, positions)]


def serialize_model(model, matrix, ranking, manifest) -> dict:
    p = len(matrix.probe_ids)
    panel = model.panel
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "manifest_sha256": manifest.sha256(),
        "m": model.m,
        "n": model.n,
        "k": panel.k,
        "t_star": model.t_star,
        "training_t": list(model.training_t),
        "down": _panel_entries(matrix, ranking, panel, panel.down,
                               range(panel.k)),
        "up": _panel_entries(matrix, ranking, panel, panel.up,
                             [p - 1 - i for i in range(panel.k)]),
    }


def load_model(path) -> dict:
    try:
        document = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read model {path!r}: {e}") from e
    if document.get("format") != MODEL_FORMAT:
        raise InputError(f"{path!r} is not a {MODEL_FORMAT} document")
    if document.get("version") != MODEL_VERSION:
        raise InputError(f"unsupported model version "
                         f"{document.get('version')!r}")
    return document


def cmd_fit(manifest: RunManifest) -> None:
    matrix = _load_matrix(manifest)
    ranking = diffexpr.rank_probes(matrix, _dp_config(manifest),
                                   threads=manifest.threads)
    panel = diffexpr.select_panel(ranking, manifest.k)
    model = classifier.fit(matrix, panel)
    document = serialize_model(model, matrix, ranking, manifest)
    text = render_json(document)
    if manifest.out:
        Path(manifest.out).write_text(text)
        sys.stdout.write(
            f"fitted k={panel.k} panel on m={model.m} cases, "
            f"n={model.n} controls; t_star={fmt_human(model.t_star)}; "
            f"model written to {manifest.out}\n")
    else:
        sys.stdout.write(text)


def cmd_classify(manifest: RunManifest) -> None:
    document = load_model(manifest.model_file)
    ds = soft_ingest.load_table(manifest.input,
                                line_window=manifest.line_window,
                                drop_incomplete=
                                manifest.drop_incomplete_probes)
    row_of = {pid: i for i, pid in enumerate(ds.probe_ids)}

    def rows_for(entries):
        out = []
        for entry in entries:
            if entry["probe_id"] not in row_of:
                raise MissingProbe(entry["probe_id"])
            out.append(row_of[entry["probe_id"]])
        return tuple(out)

    panel = SignaturePanel(k=document["k"],
                           down=rows_for(document["down"]),
                           up=rows_for(document["up"]))
    bad = np.argwhere(~(np.isfinite(ds.values) & (ds.values > 0.0)))
    if bad.size:
        i, j = bad[0]
        raise NonPositiveExpression(
            f"probe {ds.probe_ids[i]!r}, sample {ds.sample_ids[j]!r}: "
            f"{float(ds.values[i, j])!r}")
    t_star = float(document["t_star"])
    rows = []
    for col, sid in enumerate(ds.sample_ids):
        t = classifier.t_statistic(panel, ds.values[:, col])
        label = "healthy" if t <= t_star else "unhealthy"
        rows.append({"sample_id": sid, "t": t, "label": label})
    columns = ("sample_id", "t", "label")
    sys.stdout.write(render_table(columns, rows, right_align=("t",)))
    _write_machine(manifest, columns, rows)


def _confusion_rows(k, table) -> list[dict]:
    return [{
        "k": k,
        "case_unhealthy": table.case_unhealthy,
        "case_healthy": table.case_healthy,
        "control_unhealthy": table.control_unhealthy,
        "control_healthy": table.control_healthy,
        "sensitivity": table.sensitivity,
        "specificity": table.specificity,
        "fnr": table.false_negative_rate,
        "fpr": table.false_positive_rate,
    }]


def cmd_cv(manifest: RunManifest) -> None:
    matrix = _load_matrix(manifest)
    table = crossval.loocv(matrix, manifest.k, _dp_config(manifest),
                           refit_panel=manifest.refit_panel,
                           threads=manifest.threads)
    sys.stdout.write(confusion_block(table))
    sys.stdout.write(
        f"sensitivity {table.case_unhealthy}/{table.m}, "
        f"specificity {table.control_healthy}/{table.n}\n")
    rows = _confusion_rows(manifest.k, table)
    _write_machine(manifest, tuple(rows[0].keys()), rows)


def cmd_select_k(manifest: RunManifest) -> None:
    matrix = _load_matrix(manifest)
    report = crossval.select_k(matrix, manifest.k_max,
                               _dp_config(manifest),
                               refit_panel=manifest.refit_panel,
                               threads=manifest.threads)
    rows = []
    for k, table, balance in report.per_k:
        row = _confusion_rows(k, table)[0]
        row["balance"] = balance
        rows.append(row)
    columns = tuple(rows[0].keys())
    sys.stdout.write(render_table(
        columns, rows,
        right_align=tuple(c for c in columns if c != "k")))
    sys.stdout.write(f"chosen k = {report.chosen_k}\n")
    _write_machine(manifest, columns, rows,
                   extra={"chosen_k": report.chosen_k})


_COMMANDS = {
    "rank": cmd_rank,
    "panel": cmd_panel,
    "fit": cmd_fit,
    "classify": cmd_classify,
    "cv": cmd_cv,
    "select-k": cmd_select_k,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        manifest = _manifest_from_args(args)
        _COMMANDS[manifest.command](manifest)
        return 0
    except UsageError as e:
        print(f"dp-expr: usage error: {e}", file=sys.stderr)
        return 4
    except NumericalError as e:
        print(f"dp-expr: numerical failure: {e}", file=sys.stderr)
        return 3
    except (InputError, DpExprError) as e:
        print(f"dp-expr: input error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"dp-expr: cannot read input: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
