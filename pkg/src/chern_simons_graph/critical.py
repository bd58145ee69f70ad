"""Bracketing and bisection of the critical coupling ``lambda_c``.

The set of couplings with a solution is an up-set ``[lambda_c, inf)``, so a
solvable/unsolvable oracle (the monotone scheme) can be bisected.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import FiniteGraph, VortexSet, dirichlet_energy, integrate
from .monotone import CONVERGED, DIVERGED, INCONCLUSIVE, MonotoneOptions, SolveReport, compute_u0, iterate_scheme
from .nonlinearity import (
    BackgroundField,
    Problem,
    classify_sub_super,
    f_min,
    lambda_lower_bound,
    lambda_lower_bound_alt,
)

log = logging.getLogger(__name__)


class BracketError(RuntimeError):
    """The oracle contradicts the bracket or the up-set structure."""


@dataclass(frozen=True)
class OracleCall:
    lam: float
    status: str
    iterations: int


@dataclass
class CriticalLambdaResult:
    lambda_c: float
    bracket: tuple[float, float]
    tolerance: float
    oracle_calls: int
    lower_bound_derived: float
    lower_bound_paper: float
    inconclusive_count: int
    b: float = 1.0
    N: int = 1
    transcript: list[OracleCall] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return self.inconclusive_count > 0


def bracket_lower_solution(
    g: FiniteGraph, vortices: VortexSet, b: float, bg: BackgroundField, construction: str = "constant"
) -> tuple[float, np.ndarray]:
    """Coupling ``lam0`` and a function that is a lower solution for every ``lam >= lam0``.

    ``"constant"``: ``v = -c`` with ``c = max(u0) + 1``. Then
    ``Delta v = 0 >= lam f(u0 - c) + 4 pi N/|V|`` as soon as
    ``lam * min_x e^{u0-c}(1 - e^{b(u0-c)}) >= 4 pi N/|V|``.

    ``"flat"``: ``v = t* - u0`` so that ``u0 + v`` sits at the minimum of
    ``f``. Then ``Delta v - lam f(t*) - 4 pi N/|V| = lam |f(t*)| - 4 pi sum_j delta_{p_j}``,
    nonnegative once ``lam >= 4 pi max_p (n_p / mu(p)) / |f(t*)|``.
    """
    if construction == "constant":
        c = float(np.max(bg.u0)) + 1.0
        t = bg.u0 - c
        depth = float(np.min(np.exp(t) * -np.expm1(b * t)))
        return (4.0 * math.pi * vortices.N / g.volume) / depth, np.full(g.n, -c)
    if construction == "flat":
        t_star, fmin = f_min(b)
        peak = max(k / g.mu[g.index[p]] for p, k in vortices.multiplicities().items())
        return 4.0 * math.pi * peak / abs(fmin), t_star - bg.u0
    raise ValueError(f"unknown construction {construction!r}")


def upper_bracket(
    g: FiniteGraph,
    vortices: VortexSet,
    b: float,
    bg: BackgroundField,
    margin: float = 0.1,
    max_retries: int = 6,
    opts: MonotoneOptions = MonotoneOptions(),
    construction: str = "constant",
) -> float:
    """Certified solvable coupling from an explicit lower solution.

    ``construction`` is ``"constant"``, ``"flat"`` (see
    :func:`bracket_lower_solution`) or ``"best"`` (the smaller of the two).
    The coupling is inflated by ``1 + margin``, checked to make the
    construction a lower solution, and confirmed by one monotone solve;
    on failure the margin is doubled, at most ``max_retries`` times.
    """
    if construction == "best":
        return min(
            upper_bracket(g, vortices, b, bg, margin, max_retries, opts, construction=c)
            for c in ("constant", "flat")
        )
    base, v_lower = bracket_lower_solution(g, vortices, b, bg, construction)
    for _ in range(max_retries + 1):
        lam_hi = base * (1.0 + margin)
        problem = Problem(g, vortices, lam_hi, b)
        lower_ok = classify_sub_super(problem, bg, v_lower, tol=0.0) in ("lower", "solution")
        if lower_ok and iterate_scheme(problem, bg, opts).converged:
            return lam_hi
        log.warning("upper bracket %g failed verification; doubling margin", lam_hi)
        margin *= 2.0
    raise BracketError("could not certify an upper bracket for lambda_c")


class _Oracle:
    def __init__(self, g, vortices, b, bg, opts):
        self.g, self.vortices, self.b, self.bg, self.opts = g, vortices, b, bg, opts
        self.transcript: list[OracleCall] = []

    def __call__(self, lam: float) -> SolveReport:
        rep = iterate_scheme(Problem(self.g, self.vortices, lam, self.b), self.bg, self.opts)
        self.transcript.append(OracleCall(float(lam), rep.status, rep.iterations))
        self._check_upset()
        return rep

    def _check_upset(self):
        solvable = [c.lam for c in self.transcript if c.status == CONVERGED]
        unsolvable = [c.lam for c in self.transcript if c.status == DIVERGED]
        if solvable and unsolvable and min(solvable) < max(unsolvable):
            raise BracketError(
                f"oracle solvable at {min(solvable):.12g} but unsolvable at larger {max(unsolvable):.12g}"
            )


def bisect(
    g: FiniteGraph,
    vortices: VortexSet,
    b: float,
    tol: float | None = None,
    opts: MonotoneOptions = MonotoneOptions(),
    *,
    rel_tol: float = 1e-4,
    bg: BackgroundField | None = None,
    lam_hi: float | None = None,
    construction: str = "best",
) -> CriticalLambdaResult:
    """Bisect ``[lambda_lower_bound, upper_bracket]`` down to width ``tol``.

    ``tol`` defaults to ``rel_tol * upper_bracket``; the upper end comes
    from :func:`upper_bracket` with ``construction`` unless ``lam_hi`` is
    given. Converged oracle
    calls move the upper end down, diverged ones move the lower end up;
    inconclusive calls are treated as unsolvable and counted.
    """
    vortices.check(g)
    bg = compute_u0(g, vortices) if bg is None else bg
    lo = lambda_lower_bound(g, vortices.N, b)
    hi = upper_bracket(g, vortices, b, bg, opts=opts, construction=construction) if lam_hi is None else float(lam_hi)
    if tol is None:
        tol = rel_tol * hi
    if not tol > 0:
        raise ValueError("tol must be positive")

    oracle = _Oracle(g, vortices, b, bg, opts)
    if oracle(lo).status == CONVERGED:
        raise BracketError(f"solvable at the necessary lower bound {lo:.12g}; lower bound is wrong")
    if lam_hi is not None and oracle(hi).status != CONVERGED:
        raise BracketError(f"supplied upper bracket {hi:.12g} is not solvable")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if oracle(mid).status == CONVERGED:
            hi = mid
        else:
            lo = mid

    inconclusive = sum(c.status == INCONCLUSIVE for c in oracle.transcript)
    return CriticalLambdaResult(
        lambda_c=float(0.5 * (lo + hi)),
        bracket=(float(lo), float(hi)),
        tolerance=float(tol),
        oracle_calls=len(oracle.transcript),
        lower_bound_derived=lambda_lower_bound(g, vortices.N, b),
        lower_bound_paper=lambda_lower_bound_alt(g, vortices.N, b),
        inconclusive_count=inconclusive,
        b=b,
        N=vortices.N,
        transcript=oracle.transcript,
    )


@dataclass(frozen=True)
class SweepRow:
    lam: float
    status: str
    iterations: int
    mean_v: float
    J: float
    grad_norm_ratio: float


def sweep(
    g: FiniteGraph,
    vortices: VortexSet,
    b: float,
    lambdas,
    opts: MonotoneOptions = MonotoneOptions(),
    jobs: int = 1,
    bg: BackgroundField | None = None,
) -> list[SweepRow]:
    """Maximal solutions over a grid of couplings.

    ``grad_norm_ratio`` is ``||grad v||_2 / lam`` (the gradient of ``v``
    equals that of its mean-free part). Rows for non-converged couplings
    carry NaN in the solution-dependent columns.
    """
    from .variational import functional_J

    bg = compute_u0(g, vortices) if bg is None else bg

    def one(lam: float) -> SweepRow:
        problem = Problem(g, vortices, float(lam), b)
        rep = iterate_scheme(problem, bg, opts)
        if not rep.converged:
            return SweepRow(float(lam), rep.status, rep.iterations, math.nan, math.nan, math.nan)
        v = rep.v
        return SweepRow(
            float(lam),
            rep.status,
            rep.iterations,
            integrate(g, v) / g.volume,
            functional_J(problem, bg, v),
            math.sqrt(dirichlet_energy(g, v)) / lam,
        )

    lambdas = [float(x) for x in lambdas]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, lambdas))
    return [one(x) for x in lambdas]
