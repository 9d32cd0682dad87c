"""Report rendering: human tables, TSV, and JSON.

Machine formats carry probabilities at full precision (17 significant
digits in TSV; native round-tripping floats in JSON); human tables use 4
significant digits. All output is deterministic: no timestamps, no
environment-dependent content.
"""

from __future__ import annotations

import json


def fmt_machine(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def fmt_human(value) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def fmt_percent(fraction: float) -> str:
    return f"{100.0 * fraction:.4g}%"


def render_tsv(columns, rows) -> str:
    lines = ["\t".join(columns)]
    for row in rows:
        lines.append("\t".join(fmt_machine(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def render_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def render_table(columns, rows, right_align=()) -> str:
    """Plain aligned text table with a header rule."""
    cells = [[fmt_human(row[c]) for c in columns] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    def line(parts):
        return "  ".join(
            p.rjust(w) if col in right_align else p.ljust(w)
            for p, w, col in zip(parts, widths, columns)).rstrip()
    out = [line(list(columns)),
           line(["-" * w for w in widths])]
    out.extend(line(r) for r in cells)
    return "\n".join(out) + "\n"


def confusion_block(table) -> str:
    """Sensitivity/specificity block in the two-row percentage layout."""
    rows = [
        {"group": "Case", "unhealthy": fmt_percent(table.sensitivity),
         "healthy": fmt_percent(table.false_negative_rate)},
        {"group": "Control",
         "unhealthy": fmt_percent(table.false_positive_rate),
         "healthy": fmt_percent(table.specificity)},
    ]
    return render_table(("group", "unhealthy", "healthy"), rows,
                        right_align=("unhealthy", "healthy"))
