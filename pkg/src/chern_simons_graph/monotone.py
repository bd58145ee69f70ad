"""Monotone iteration for the maximal solution of the reduced equation.

Starting from ``v0 = -u0`` the scheme

    (Delta - K) v_n = lam f(u0 + v_{n-1}) - K v_{n-1} + 4 pi N/|V|,   K > b lam,

produces a pointwise decreasing sequence that stays above every lower
solution. It therefore converges to the maximal solution when one exists
and sinks without bound otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import FiniteGraph, VortexSet, integrate, laplacian, vortex_source
from .linalg import DEFAULT_OPTIONS, LinearSolveOptions, shifted_solver, solve_poisson_mean_zero
from .nonlinearity import BackgroundField, Problem, f_eval, f_min, residual

log = logging.getLogger(__name__)

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MonotoneOptions:
    K_margin: float = 1.0
    step_tolerance: float = 1e-12
    max_iterations: int = 100_000
    divergence_floor: float = -1e6
    linear: LinearSolveOptions = DEFAULT_OPTIONS

    def __post_init__(self):
        if not self.K_margin > 0:
            raise ValueError("K_margin must be positive (the scheme needs K > b*lambda)")
        if not self.divergence_floor < 0:
            raise ValueError("divergence_floor must be negative")
        if not self.step_tolerance > 0 or self.max_iterations < 1:
            raise ValueError("step_tolerance must be positive and max_iterations >= 1")


@dataclass
class SolveReport:
    """Outcome of a solver run.

    ``v`` is set only when ``status == "converged"``. ``monotone_violations``
    counts iterations in which some vertex increased (should be zero for
    the monotone scheme, and counts rejected energy increases for descent
    solvers).
    """

    status: str
    v: np.ndarray | None
    iterations: int
    final_residual_sup: float
    monotone_violations: int
    min_u0_plus_v: float
    max_u0_plus_v: float
    lam: float
    reason: str = ""
    max_increment: float = -math.inf
    details: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def compute_u0(g: FiniteGraph, vortices: VortexSet, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> BackgroundField:
    """Mean-zero ``u0`` with ``Delta u0 = -4 pi N/|V| + 4 pi sum_j delta_{p_j}``."""
    rhs = 4.0 * math.pi * (vortex_source(g, vortices) - vortices.N / g.volume)
    return BackgroundField(solve_poisson_mean_zero(g, rhs, opts))


def nonexistence_threshold(problem: Problem) -> float:
    """Level below which ``max(u0 + v)`` rules out any solution.

    Integrating the equation gives ``int -f(u) dmu = 4 pi N / lam``. Since
    ``-f`` increases on ``(-inf, t*]``, a solution needs
    ``|V| * (-f(max u)) >= 4 pi N / lam`` whenever ``max u <= t*``. Returns
    the largest ``s <= t*`` with ``|V| (-f(s)) <= 4 pi N/lam`` (or ``t*``
    if even the peak value of ``-f`` is too small).
    """
    b = problem.b
    target = 4.0 * math.pi * problem.N / (problem.lam * problem.graph.volume)
    t_star, fmin = f_min(b)
    if -fmin <= target:
        return t_star
    lo, hi = math.log(target) - 1.0, t_star
    while -f_eval(b, lo) > target:
        lo -= 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if -f_eval(b, mid) > target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-14 * max(1.0, abs(lo)):
            break
    return lo


def _report(problem, bg, v, status, n, violations, max_inc, reason, details=None) -> SolveReport:
    u = bg.u0 + v
    return SolveReport(
        status=status,
        v=v if status == CONVERGED else None,
        iterations=n,
        final_residual_sup=float(np.max(np.abs(residual(problem, bg, v)))),
        monotone_violations=violations,
        min_u0_plus_v=float(u.min()),
        max_u0_plus_v=float(u.max()),
        lam=problem.lam,
        reason=reason,
        max_increment=max_inc,
        details=details or {},
    )


def iterate_scheme(
    problem: Problem,
    bg: BackgroundField,
    opts: MonotoneOptions = MonotoneOptions(),
    *,
    history: list | None = None,
) -> SolveReport:
    """Run the monotone scheme from ``v0 = -u0``.

    ``status`` is ``"converged"`` once the sup-norm step drops below
    ``opts.step_tolerance``; ``"diverged"`` once the iterates fall below a
    level at which no solution can exist (or below
    ``opts.divergence_floor`` on average); ``"inconclusive"`` at the
    iteration cap. If ``history`` is a list, every iterate is appended.
    """
    g = problem.graph
    lam, b = problem.lam, problem.b
    K = b * lam + opts.K_margin
    solver = shifted_solver(g, K, opts.linear)
    c = problem.source_constant
    floor_u = nonexistence_threshold(problem)
    vol = g.volume

    v = -bg.u0.copy()
    if history is not None:
        history.append(v.copy())
    violations = 0
    max_inc = -math.inf
    for n in range(1, opts.max_iterations + 1):
        rhs = lam * f_eval(b, bg.u0 + v) - K * v + c
        v_new = solver.solve(rhs, check=False)
        step = v_new - v
        inc = float(step.max())
        size = float(np.max(np.abs(step)))
        v = v_new
        if history is not None:
            history.append(v.copy())
        if size < opts.step_tolerance:
            return _report(problem, bg, v, CONVERGED, n, violations, max_inc, "step below tolerance", {"K": K})
        max_inc = max(max_inc, inc)
        if inc > 0:
            violations += 1
        umax = float(np.max(bg.u0 + v))
        if umax < floor_u:
            return _report(
                problem, bg, v, DIVERGED, n, violations, max_inc,
                f"max(u0+v)={umax:.6g} below nonexistence level {floor_u:.6g}", {"K": K},
            )
        if integrate(g, v) / vol < opts.divergence_floor:
            return _report(problem, bg, v, DIVERGED, n, violations, max_inc, "mean below divergence floor", {"K": K})
    log.info("monotone scheme hit the iteration cap at lambda=%g", lam)
    return _report(problem, bg, v, INCONCLUSIVE, opts.max_iterations, violations, max_inc, "iteration cap", {"K": K})


def solve_at_critical(
    problem: Problem,
    bg: BackgroundField,
    opts: MonotoneOptions = MonotoneOptions(),
    levels: int = 9,
) -> SolveReport:
    """Maximal solution at an estimate of the critical coupling, as a limit from above.

    Solves at ``lam + eps_k`` with ``eps_k = lam 2^{-k} 10^{-2}``,
    ``k = 0..levels-1``, checks that the ladder decreases pointwise, then
    takes the limit by a direct monotone solve at ``lam`` (the decreasing
    ladder is bounded below by it). A square-root Richardson extrapolation
    of the ladder is recorded in ``details`` as a cross-check.
    """
    lam = problem.lam
    eps = [lam * 2.0**-k * 1e-2 for k in range(levels)]
    ladder = []
    for e in eps:
        rep = iterate_scheme(problem.with_lambda(lam + e), bg, opts)
        if not rep.converged:
            raise RuntimeError(f"solve at lambda={lam + e:.12g} ended {rep.status}; critical estimate too low?")
        ladder.append(rep.v)
    gaps = [float(np.min(a - b)) for a, b in zip(ladder, ladder[1:])]

    limit = iterate_scheme(problem, bg, opts)
    if not limit.converged:
        raise RuntimeError(f"solve at the critical estimate lambda={lam:.12g} ended {limit.status}")

    # near a fold v(lam + eps) ~ v* + a sqrt(eps) + c eps; eliminate both terms
    s = np.sqrt(np.array(eps[-3:]))
    V = np.vstack([np.ones(3), s, s**2]).T
    coeffs = np.linalg.solve(V, np.vstack(ladder[-3:]))
    extrapolated = coeffs[0]

    limit.details.update(
        ladder_lambdas=[lam + e for e in eps],
        ladder_min_gaps=gaps,
        ladder_monotone=all(gp > 0 for gp in gaps),
        extrapolated=extrapolated,
        extrapolation_gap_sup=float(np.max(np.abs(extrapolated - limit.v))),
        extrapolated_residual_sup=float(np.max(np.abs(residual(problem, bg, extrapolated)))),
    )
    return limit


def verify_maximum_principle(g: FiniteGraph, K: float, u, tol: float = 1e-10) -> bool:
    """Check ``Delta u - K u >= 0  ==>  u <= 0`` for the given ``u``.

    ``tol`` is relative to ``max(1, |u|_inf)``.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    u = g.function(u)
    scale = tol * max(1.0, float(np.max(np.abs(u))))
    hypothesis = bool(np.all(laplacian(g, u) - K * u >= -scale * (K + 1.0)))
    return (not hypothesis) or bool(np.all(u <= scale))
