"""Deterministic CSV / JSON tables: exact fractions as "p/q", floats to 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .ratmod import fmt

FORMATS = ("csv", "json")


def format_float(x: float) -> str:
    """Round to 12 significant digits, then print the shortest text that parses back to that double."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return repr(float("%.12g" % x))


def cell(value: Any) -> Any:
    """JSON-ready scalar: ints and bools stay, fractions become "p/q", floats are rounded."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return fmt(value)
    if isinstance(value, complex):
        return [cell(value.real), cell(value.imag)]
    if isinstance(value, float) or hasattr(value, "__float__"):
        x = float(value)
        return float(format_float(x)) if math.isfinite(x) else format_float(x)
    if isinstance(value, (list, tuple)):
        return [cell(v) for v in value]
    raise TypeError(f"cannot tabulate {type(value).__name__}")


def _csv_text(value: Any) -> str:
    v = cell(value)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, list):
        return " ".join(_csv_text(x) for x in v)
    return str(v)


def render(rows: Iterable[Mapping[str, Any]], columns: Sequence[str], format: str = "csv") -> str:
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}")
    rows = list(rows)
    if format == "json":
        body = [{c: cell(r.get(c)) for c in columns} for r in rows]
        return json.dumps({"columns": list(columns), "rows": body}, indent=1) + "\n"
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_csv_text(r.get(c)) for c in columns])
    return buf.getvalue()


def emit_table(rows: Iterable[Mapping[str, Any]], columns: Sequence[str], format: str = "csv",
               path: str | Path | None = None) -> str:
    """Render and, when a path is given, write the table. Returns the text."""
    text = render(rows, columns, format)
    if path is not None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_table(text: str, format: str = "csv") -> tuple[list[str], list[dict[str, Any]]]:
    """Inverse of ``render`` up to cell types: JSON keeps types, CSV gives strings."""
    if format == "json":
        obj = json.loads(text)
        return obj["columns"], obj["rows"]
    rd = csv.reader(io.StringIO(text))
    lines = list(rd)
    if not lines:
        return [], []
    cols = lines[0]
    return cols, [dict(zip(cols, r)) for r in lines[1:]]
