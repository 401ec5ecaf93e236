"""Deterministic CSV/JSON serialization of result tables.

Floats are written in their shortest round-trip form (``repr``), so
``float(text)`` recovers the exact in-memory value; infinities appear as the
literal ``inf``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    out = Path(path)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return out


def _parse(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path) -> tuple[list[str], list[list]]:
    """Header and rows, with numeric cells converted back to int/float."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[_parse(c) for c in row] for row in reader]


def read_columns(path) -> dict[str, np.ndarray]:
    """Numeric CSV as ``{column: float array}``."""
    header, rows = read_csv(path)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    return value


def write_json(path, payload) -> Path:
    """JSON with non-finite floats as the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
    out = Path(path)
    out.write_text(json.dumps(_json_safe(payload), indent=2) + "\n", encoding="utf-8")
    return out


def table_payload(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> dict:
    return {"columns": list(header), "rows": [list(r) for r in rows]}
