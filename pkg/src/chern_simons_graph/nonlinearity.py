"""The Chern-Simons nonlinearity ``f(t) = e^t (e^{bt} - 1)`` and the reduced equation.

With ``u = u0 + v`` the equation becomes

    Delta v = lam * f(u0 + v) + 4 pi N / |V|,

and everything in this module is phrased in terms of ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import FiniteGraph, GraphError, VortexSet, laplacian

# exp overflows just above 709.78
_EXP_LIMIT = 709.0


def _check_exponent(x, where: str):
    if np.any(np.asarray(x) > _EXP_LIMIT):
        raise OverflowError(f"{where}: exponent {np.max(x):.3g} overflows double precision")


def f_eval(b: float, t):
    """``e^t (e^{bt} - 1)``, evaluated as ``e^t * expm1(bt)``.

    Works on scalars and arrays. Raises ``OverflowError`` when
    ``(b + 1) t`` leaves the representable range.
    """
    t = np.asarray(t, dtype=float)
    _check_exponent((b + 1.0) * t, "f_eval")
    out = np.exp(t) * np.expm1(b * t)
    return float(out) if out.ndim == 0 else out


def f_prime(b: float, t):
    """``(b + 1) e^{(b+1)t} - e^t``."""
    t = np.asarray(t, dtype=float)
    _check_exponent((b + 1.0) * t, "f_prime")
    out = np.exp(t) * ((b + 1.0) * np.exp(b * t) - 1.0)
    return float(out) if out.ndim == 0 else out


def f_min(b: float) -> tuple[float, float]:
    """Location and value of the global minimum of ``f`` on the real line.

    ``t* = -ln(b+1)/b`` and ``f(t*) = -b (b+1)^{-(b+1)/b}``.
    """
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    t_star = -math.log1p(b) / b
    value = -b * (b + 1.0) ** (-(b + 1.0) / b)
    return t_star, value


def f_min_alt(b: float) -> float:
    """The alternative closed form ``-b / (b+1)^{b+1}``.

    It equals the true minimum from :func:`f_min` only at ``b = 1``.
    """
    return -b / (b + 1.0) ** (b + 1.0)


def lambda_lower_bound(g: FiniteGraph, N: int, b: float) -> float:
    """Necessary condition ``lam >= (4 pi N / |V|) / |min f|`` for solvability."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return (4.0 * math.pi * N / g.volume) / abs(f_min(b)[1])


def lambda_lower_bound_alt(g: FiniteGraph, N: int, b: float) -> float:
    """Bound built on :func:`f_min_alt`; coincides with :func:`lambda_lower_bound` at b=1."""
    return (b + 1.0) ** (b + 1.0) / b * 4.0 * math.pi * N / g.volume


@dataclass(frozen=True)
class Problem:
    """One instance of the equation: graph, vortices, coupling ``lam`` and ``b``."""

    graph: FiniteGraph
    vortices: VortexSet
    lam: float
    b: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"b must be positive, got {self.b}")
        self.vortices.check(self.graph)

    @property
    def N(self) -> int:
        return self.vortices.N

    @property
    def source_constant(self) -> float:
        """``4 pi N / |V|``."""
        return 4.0 * math.pi * self.N / self.graph.volume

    def with_lambda(self, lam: float) -> "Problem":
        return Problem(self.graph, self.vortices, float(lam), self.b)


@dataclass(frozen=True)
class BackgroundField:
    """Background potential ``u0`` absorbing the vortex sources."""

    u0: np.ndarray

    def shifted(self, c: float) -> "BackgroundField":
        return BackgroundField(self.u0 + c)


def residual(problem: Problem, bg: BackgroundField, v) -> np.ndarray:
    """``Delta v - lam f(u0 + v) - 4 pi N/|V|`` at every vertex."""
    g = problem.graph
    v = g.function(v)
    if bg.u0.shape != v.shape:
        raise GraphError("background field does not match the graph")
    return laplacian(g, v) - problem.lam * f_eval(problem.b, bg.u0 + v) - problem.source_constant


def classify_sub_super(problem: Problem, bg: BackgroundField, v, tol: float = 1e-9) -> str:
    """Return ``"solution"``, ``"lower"``, ``"upper"`` or ``"neither"``.

    A lower solution has ``Delta v >= lam f + 4 pi N/|V|`` (residual >= 0),
    an upper solution the reverse inequality. ``tol`` is absolute.
    """
    r = residual(problem, bg, v)
    lower = bool(np.all(r >= -tol))
    upper = bool(np.all(r <= tol))
    if lower and upper:
        return "solution"
    if lower:
        return "lower"
    if upper:
        return "upper"
    return "neither"
