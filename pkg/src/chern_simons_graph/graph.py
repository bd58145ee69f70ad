"""Finite weighted graphs and the discrete calculus on them.

Vertex functions are plain ``numpy`` arrays aligned with the graph's
canonical vertex order (ids sorted lexicographically).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


class GraphError(ValueError):
    """Raised for malformed graphs, vertex functions or vortex data."""


class FiniteGraph:
    """Connected, undirected, weighted graph with a positive vertex measure.

    Parameters
    ----------
    mu : mapping of vertex id -> positive measure
    edges : iterable of ``(u, v, w)`` with ``w > 0``

    The instance is immutable after construction; the weight matrix and
    combinatorial Laplacian are precomputed.
    """

    def __init__(self, mu: Mapping[str, float], edges: Iterable[tuple[str, str, float]]):
        if not mu:
            raise GraphError("graph has no vertices")
        ids = tuple(sorted(str(x) for x in mu))
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex ids")
        index = {x: i for i, x in enumerate(ids)}
        measure = np.array([float(mu[x]) for x in ids])
        for x, m in zip(ids, measure):
            if not (math.isfinite(m) and m > 0):
                raise GraphError(f"vertex {x!r} has nonpositive or non-finite measure {m}")

        rows, cols, weights = [], [], []
        seen = set()
        for u, v, w in edges:
            u, v, w = str(u), str(v), float(w)
            for x in (u, v):
                if x not in index:
                    raise GraphError(f"edge endpoint {x!r} is not a vertex")
            if u == v:
                raise GraphError(f"self-loop at vertex {u!r}")
            if not (math.isfinite(w) and w > 0):
                raise GraphError(f"edge {u!r}-{v!r} has nonpositive or non-finite weight {w}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {u!r}-{v!r}")
            seen.add(key)
            i, j = sorted((index[u], index[v]))
            rows.append(i)
            cols.append(j)
            weights.append(w)

        n = len(ids)
        self.ids = ids
        self.index = index
        self.mu = measure
        self.mu.flags.writeable = False
        self.edge_index = np.array([rows, cols], dtype=np.intp).reshape(2, -1).T
        self.edge_index.flags.writeable = False
        self.weights = np.array(weights, dtype=float)
        self.weights.flags.writeable = False

        upper = sparse.coo_matrix((self.weights, (rows, cols)), shape=(n, n))
        self.W = (upper + upper.T).tocsr()
        self.degree = np.asarray(self.W.sum(axis=1)).ravel()
        self.combinatorial_laplacian = (sparse.diags(self.degree) - self.W).tocsr()

        if n > 1:
            ncomp, _ = csgraph.connected_components(self.W, directed=False)
            if ncomp != 1:
                raise GraphError(f"graph is disconnected ({ncomp} components); add edges so every vertex is reachable")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def volume(self) -> float:
        """Total measure ``sum_x mu(x)``."""
        return float(self.mu.sum())

    def __repr__(self) -> str:
        return f"FiniteGraph(n={self.n}, edges={len(self.weights)}, volume={self.volume:g})"

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping) -> "FiniteGraph":
        try:
            verts = data["vertices"]
            edges = data["edges"]
            mu = {}
            for entry in verts:
                vid = str(entry["id"])
                if vid in mu:
                    raise GraphError(f"duplicate vertex id {vid!r}")
                mu[vid] = entry.get("mu", 1.0)
            triples = [(e["u"], e["v"], e.get("w", 1.0)) for e in edges]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: missing or invalid field {exc}") from None
        return cls(mu, triples)

    @classmethod
    def from_json(cls, path: str | Path) -> "FiniteGraph":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    @classmethod
    def from_adjacency(cls, W, mu=None, ids: Sequence[str] | None = None) -> "FiniteGraph":
        """Build from a symmetric weight matrix (dense or sparse)."""
        W = sparse.coo_matrix(W)
        n = W.shape[0]
        if ids is None:
            width = len(str(n - 1))
            ids = [f"v{i:0{width}d}" for i in range(n)]
        mu = np.ones(n) if mu is None else np.asarray(mu, dtype=float)
        edges = [(ids[i], ids[j], w) for i, j, w in zip(W.row, W.col, W.data) if i < j]
        return cls(dict(zip(ids, mu)), edges)

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": x, "mu": float(m)} for x, m in zip(self.ids, self.mu)],
            "edges": [
                {"u": self.ids[i], "v": self.ids[j], "w": float(w)}
                for (i, j), w in zip(self.edge_index, self.weights)
            ],
        }

    # -- vertex functions ------------------------------------------------------

    def function(self, values) -> np.ndarray:
        """Validate ``values`` as a vertex function on this graph."""
        u = np.asarray(values, dtype=float)
        if u.shape != (self.n,):
            raise GraphError(f"vertex function has shape {u.shape}, graph has {self.n} vertices")
        if not np.all(np.isfinite(u)):
            raise GraphError("vertex function has non-finite entries")
        return u

    def function_from_map(self, values: Mapping[str, float]) -> np.ndarray:
        missing = [x for x in self.ids if x not in values]
        if missing:
            raise GraphError(f"missing value for vertex {missing[0]!r}")
        extra = sorted(set(map(str, values)) - set(self.ids))
        if extra:
            raise GraphError(f"value given for unknown vertex {extra[0]!r}")
        out = np.empty(self.n)
        for i, x in enumerate(self.ids):
            try:
                out[i] = float(values[x])
            except (TypeError, ValueError):
                raise GraphError(f"value for vertex {x!r} is not a number: {values[x]!r}") from None
            if not math.isfinite(out[i]):
                raise GraphError(f"value for vertex {x!r} is not finite: {values[x]!r}")
        return out

    def function_to_map(self, u) -> dict[str, float]:
        return {x: float(val) for x, val in zip(self.ids, u)}


@dataclass(frozen=True)
class VortexSet:
    """Multiset of vortex locations; repeated ids carry multiplicity."""

    points: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(str(p) for p in self.points)))
        if not self.points:
            raise GraphError("at least one vortex is required")

    @property
    def N(self) -> int:
        return len(self.points)

    def multiplicities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p in self.points:
            out[p] = out.get(p, 0) + 1
        return out

    def check(self, g: FiniteGraph, strict_distinct: bool = False) -> "VortexSet":
        for p in self.points:
            if p not in g.index:
                raise GraphError(f"vortex {p!r} is not a vertex of the graph")
        if strict_distinct and len(set(self.points)) != len(self.points):
            dup = next(p for p, k in self.multiplicities().items() if k > 1)
            raise GraphError(f"vortex {dup!r} repeated but distinct points were required")
        return self


# -- discrete calculus -------------------------------------------------------


def laplacian(g: FiniteGraph, u) -> np.ndarray:
    """mu-Laplacian ``(1/mu(x)) sum_{y~x} w_xy (u(y) - u(x))``."""
    u = g.function(u)
    return (g.W @ u - g.degree * u) / g.mu


def gradient_form(g: FiniteGraph, u, v) -> np.ndarray:
    """Carre du champ ``Gamma(u, v)`` at every vertex."""
    u = g.function(u)
    v = g.function(v)
    i, j = g.edge_index.T
    terms = g.weights * (u[j] - u[i]) * (v[j] - v[i])
    acc = np.bincount(i, terms, minlength=g.n) + np.bincount(j, terms, minlength=g.n)
    return acc / (2.0 * g.mu)


def grad_norm(g: FiniteGraph, u) -> np.ndarray:
    return np.sqrt(gradient_form(g, u, u))


def integrate(g: FiniteGraph, f) -> float:
    return float(g.mu @ g.function(f))


def dirichlet_energy(g: FiniteGraph, u) -> float:
    """``int |grad u|^2 dmu``, summed edge-wise (equal to integrate(grad_norm**2))."""
    u = g.function(u)
    i, j = g.edge_index.T
    return float(g.weights @ (u[j] - u[i]) ** 2)


def dirac_mass(g: FiniteGraph, p: str) -> np.ndarray:
    """Unit-mass delta at ``p``: value ``1/mu(p)`` there, so its integral is 1."""
    if p not in g.index:
        raise GraphError(f"{p!r} is not a vertex of the graph")
    out = np.zeros(g.n)
    i = g.index[p]
    out[i] = 1.0 / g.mu[i]
    return out


def vortex_source(g: FiniteGraph, vortices: VortexSet) -> np.ndarray:
    """``sum_j delta_{p_j}`` counting multiplicity."""
    vortices.check(g)
    out = np.zeros(g.n)
    for p in vortices.points:
        out += dirac_mass(g, p)
    return out
