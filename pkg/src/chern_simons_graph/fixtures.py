"""Small reference graphs shipped with the package.

Each graph comes in a unit-measure variant and a ``*_weighted`` variant
with non-unit measure and edge weights. The JSON copies under
``data/graphs`` are generated from these builders (see
:func:`write_fixture_files`).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .graph import FiniteGraph


def _variant(ids, edges, weighted: bool) -> FiniteGraph:
    if not weighted:
        return FiniteGraph({x: 1.0 for x in ids}, [(u, v, 1.0) for u, v in edges])
    mu = {x: (1.0, 2.0, 0.5)[k % 3] for k, x in enumerate(ids)}
    return FiniteGraph(mu, [(u, v, (1.0, 1.5, 0.75, 2.0)[k % 4]) for k, (u, v) in enumerate(edges)])


def k2(weighted: bool = False) -> FiniteGraph:
    return _variant(["x1", "x2"], [("x1", "x2")], weighted)


def path4(weighted: bool = False) -> FiniteGraph:
    ids = [f"p{i}" for i in range(4)]
    return _variant(ids, list(zip(ids, ids[1:])), weighted)


def torus(m: int = 4, weighted: bool = False) -> FiniteGraph:
    """``m x m`` periodic lattice (discrete doubly periodic domain)."""
    ids = [f"t{i}{j}" if m <= 10 else f"t{i:02d}_{j:02d}" for i in range(m) for j in range(m)]
    at = lambda i, j: ids[(i % m) * m + (j % m)]  # noqa: E731
    edges = []
    for i in range(m):
        for j in range(m):
            edges.append((at(i, j), at(i + 1, j)))
            edges.append((at(i, j), at(i, j + 1)))
    return _variant(ids, edges, weighted)


def petersen(weighted: bool = False) -> FiniteGraph:
    outer = [f"o{i}" for i in range(5)]
    inner = [f"i{i}" for i in range(5)]
    edges = [(outer[i], outer[(i + 1) % 5]) for i in range(5)]
    edges += [(outer[i], inner[i]) for i in range(5)]
    edges += [(inner[i], inner[(i + 2) % 5]) for i in range(5)]
    return _variant(outer + inner, edges, weighted)


BUILDERS = {"k2": k2, "path4": path4, "torus4x4": torus, "petersen": petersen}

# default vortex for each fixture, used by examples and tests
DEFAULT_VORTEX = {"k2": "x1", "path4": "p0", "torus4x4": "t00", "petersen": "o0"}


def fixture_names() -> list[str]:
    return [f"{name}{suffix}" for name in BUILDERS for suffix in ("", "_weighted")]


def fixture(name: str) -> FiniteGraph:
    base, _, suffix = name.partition("_")
    if base not in BUILDERS or suffix not in ("", "weighted"):
        raise KeyError(f"unknown fixture {name!r}; choose from {fixture_names()}")
    return BUILDERS[base](weighted=bool(suffix))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("chern_simons_graph") / "data" / "graphs" / f"{name}.json"))


def write_fixture_files(directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in fixture_names():
        text = json.dumps(fixture(name).to_dict(), indent=1)
        (directory / f"{name}.json").write_text(text + "\n")
