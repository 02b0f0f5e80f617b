"""Delimited output: CSV bodies with comment metadata, byte-stable by design.

Every file starts with a `#` header block carrying the schema version and the
full parameter echo as one JSON line, so any output can be re-run from its own
header.  No timestamps, hostnames, or library versions appear anywhere: the
same configuration must produce the same bytes.
"""

from __future__ import annotations

import json
import sys
from typing import Any, Iterable, Sequence

__all__ = ["SCHEMA_VERSION", "format_number", "csv_text", "mc_report_text", "write_text"]

SCHEMA_VERSION = "1"


def format_number(v: float) -> str:
    """12 significant digits, scientific notation."""
    return f"{float(v):.11e}"


def _params_line(params: dict[str, Any]) -> str:
    return "# params: " + json.dumps(params, separators=(", ", ": "))


def csv_text(command: str, params: dict[str, Any], columns: Sequence[str],
             rows: Iterable[Sequence[float]], notes: Sequence[str] = ()) -> str:
    """Assemble a complete CSV document (header block, column line, data rows)."""
    lines = [
        f"# levyexit csv schema {SCHEMA_VERSION}",
        f"# command: {command}",
        _params_line(params),
    ]
    lines.extend(f"# {note}" for note in notes)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def mc_report_text(quantity: str, params: dict[str, Any], estimate: float,
                   stderr: float, n_censored: int, n_paths: int,
                   solver_value: float, z: float, unreliable: bool) -> str:
    """Single-line cross-validation report with the same metadata header."""
    data = (
        f"quantity={quantity}"
        f" estimate={format_number(estimate)}"
        f" stderr={format_number(stderr)}"
        f" censored={n_censored}/{n_paths}"
        f" solver={format_number(solver_value)}"
        f" z={z:+.4f}"
        f" unreliable={'yes' if unreliable else 'no'}"
    )
    return "\n".join([
        f"# levyexit mc schema {SCHEMA_VERSION}",
        _params_line(params),
        data,
    ]) + "\n"


def write_text(path: str | None, text: str) -> None:
    """Write UTF-8 text with \\n endings to path, or stdout when path is None."""
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
