"""Deterministic JSON and CSV reports.

Floats are written with the fixed format ``%.12e`` and keys are sorted, so
the same results always produce byte-identical files.  Non-finite floats
become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.12e"


def to_plain(value):
    """Reduce numpy scalars, arrays, dataclasses and enums to JSON-like values."""
    if hasattr(value, "to_json"):
        return to_plain(value.to_json())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_plain(dataclasses.asdict(value))
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    return value


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return FLOAT_FORMAT % x


def dumps(value) -> str:
    """Compact deterministic JSON for an already plain value."""
    if isinstance(value, dict):
        items = (json.dumps(k) + ":" + dumps(value[k]) for k in sorted(value))
        return "{" + ",".join(items) + "}"
    if isinstance(value, list):
        return "[" + ",".join(dumps(v) for v in value) + "]"
    if isinstance(value, float):
        return _float(value)
    return json.dumps(value)


def _cell(value) -> str:
    if isinstance(value, (dict, list)):
        return dumps(value)
    if isinstance(value, float):
        return _float(value).strip('"')
    if value is None:
        return ""
    return str(value).lower() if isinstance(value, bool) else str(value)


def render(results, fmt: str) -> str:
    rows = [to_plain(r) for r in results]
    if not rows:
        raise ValueError("refusing to write an empty report")
    if fmt == "json":
        return "[\n" + ",\n".join(dumps(r) for r in rows) + "\n]\n"
    if fmt == "csv":
        rows = [r if isinstance(r, dict) else {"value": r} for r in rows]
        columns = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r.get(c)) for c in columns])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}; expected json or csv")


def emit_report(results, path, fmt: str = "json") -> Path:
    """Write ``results`` (one record per item) to ``path``; returns the path."""
    text = render(list(results), fmt)
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
