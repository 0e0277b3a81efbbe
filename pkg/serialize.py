"""
Output formatting for the CLI: aligned text tables, JSON documents with
exact rationals as "p/q" strings, and verdict colouring.
"""

import json
from fractions import Fraction
from typing import Iterable, Sequence

from exactalg import ExactMatrix

ANSI = {
    "green": "\033[32m",
    "yellow": "\033[33m",
    "red": "\033[31m",
}
RESET = "\033[0m"


def rational(x) -> str:
    """Lowest terms with a positive denominator; integers without '/1'."""
    return str(Fraction(x))


def colorize(text: str, color: str, enabled: bool) -> str:
    if not enabled:
        return text
    return f"{ANSI[color]}{text}{RESET}"


def table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(map(str, r)) for r in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    lines = ["  ".join(str(h).rjust(w) for h, w in zip(header, widths)).rstrip()]
    for r in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def matrix_text(M: ExactMatrix) -> str:
    """Named square matrix with exact entries, one row per line."""
    header = [""] + list(M.index)
    rows = [[u] + [rational(M.entry(u, v)) for v in M.index] for u in M.index]
    return table(header, rows)


def dumps(document) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def cycle_text(coefficients) -> str:
    return " + ".join(f"{rational(c)}*E_{v}" for v, c in coefficients.items() if c) or "0"


def check_summary_text(summary) -> str:
    lines = [
        f"check seed={summary.seed} count={summary.count} "
        f"max-vertices={summary.max_vertices} mode={summary.mode}"
    ]
    rows = [
        [name, str(t.checked), str(t.skipped), str(t.failed)]
        for name, t in sorted(summary.tallies.items())
    ]
    lines.append(table(["property", "checked", "skipped", "failed"], rows))
    for finding in summary.findings:
        lines.append(f"finding: {finding}")
    for failure in summary.failures:
        lines.append(f"FAIL instance {failure.instance} {failure.prop}: {failure.message}")
    return "\n".join(lines) + "\n"


def check_summary_json(summary) -> dict:
    return {
        "seed": summary.seed,
        "count": summary.count,
        "maxVertices": summary.max_vertices,
        "mode": summary.mode,
        "passed": summary.passed,
        "properties": {
            name: {"checked": t.checked, "skipped": t.skipped, "failed": t.failed}
            for name, t in sorted(summary.tallies.items())
        },
        "findings": list(summary.findings),
        "failures": [
            {"instance": f.instance, "property": f.prop, "message": f.message, "reproducer": f.reproducer}
            for f in summary.failures
        ],
    }
