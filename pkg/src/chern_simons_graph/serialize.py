"""JSON/TSV encoding of solver reports and vertex functions.

Vertex functions are written as ``{vertex id: value}`` maps in canonical
vertex order. Floats use Python's shortest round-trip ``repr`` so output
is lossless and byte-for-byte reproducible; non-finite values become
``null``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .graph import FiniteGraph, GraphError


def _clean(x, g: FiniteGraph | None):
    if isinstance(x, np.ndarray):
        if g is not None and x.shape == (g.n,):
            return {k: _clean(float(v), g) for k, v in zip(g.ids, x)}
        return [_clean(v, g) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: _clean(getattr(x, f.name), g) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): _clean(v, g) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v, g) for v in x]
    return x


def to_jsonable(obj, g: FiniteGraph | None = None):
    """Plain-JSON view of reports, arrays and dataclasses (vertex arrays become id maps)."""
    return _clean(obj, g)


def dumps(obj, g: FiniteGraph | None = None) -> str:
    return json.dumps(to_jsonable(obj, g), indent=2, allow_nan=False)


def write_solution(g: FiniteGraph, v, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.function_to_map(g.function(v)), indent=2) + "\n")


def load_solution(g: FiniteGraph, path: str | Path) -> np.ndarray:
    """Read an id -> value map (or a report with a ``"v"`` map) as a vertex function."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict) and isinstance(data.get("v"), dict):
        data = data["v"]
    if not isinstance(data, dict):
        raise GraphError(f"{path}: expected a map from vertex id to value")
    return g.function_from_map(data)


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_tsv(rows: list[dict], columns: list[str]) -> str:
    lines = ["\t".join(columns)]
    for row in rows:
        lines.append("\t".join(_fmt(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"
