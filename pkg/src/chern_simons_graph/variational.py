"""Energy functional of the reduced equation and its critical points.

    J(v) = 1/2 int |grad v|^2 + lam/(b+1) int e^{(b+1)(u0+v)} - lam int e^{u0+v}
           + (4 pi N/|V|) int v

Gradients are taken in the L^2(mu) inner product, so ``grad_J(v) = 0`` is
exactly the reduced equation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy import sparse
from scipy.sparse import linalg as spla

from .critical import CriticalLambdaResult
from .graph import dirichlet_energy, integrate, laplacian
from .monotone import CONVERGED, MonotoneOptions, SolveReport, iterate_scheme, solve_at_critical
from .nonlinearity import BackgroundField, Problem, _check_exponent, f_eval, f_prime, residual

log = logging.getLogger(__name__)

_EXP_CAP = 50.0

DISTINCT_MAXIMAL = "distinct_maximal"
MOUNTAIN_PASS = "mountain_pass"


class VariationalError(RuntimeError):
    pass


@dataclass(frozen=True)
class ObstacleSet:
    """``{v : v >= v_star}`` with ``v_star`` a solution at coupling ``lam_star``.

    ``from_bracket`` marks an obstacle taken at the solvable end of a
    critical-coupling bracket rather than at the exact critical value.
    """

    v_star: np.ndarray
    lam_star: float
    from_bracket: bool = True


@dataclass(frozen=True)
class DescentOptions:
    tolerance: float = 1e-10
    max_iterations: int = 200_000
    armijo: float = 1e-4
    newton_polish: bool = True


@dataclass(frozen=True)
class MountainPassOptions:
    path_points: int = 64
    descent_tolerance: float = 1e-8
    max_deformations: int = 50_000
    tau_growth: float = 2.0
    armijo: float = 1e-4
    newton_switch: float = 1e-3

    def __post_init__(self):
        if self.path_points < 3:
            raise ValueError("path_points must be >= 3")
        if not self.tau_growth > 1:
            raise ValueError("tau_growth must exceed 1")


@dataclass
class MultiplicityResult:
    minimizer: np.ndarray
    second: np.ndarray
    J_min: float
    J_second: float
    c0: float | None
    route: str
    separation_sup: float
    residual_minimizer: float = math.nan
    residual_second: float = math.nan
    lam: float = math.nan
    obstacle_lambda: float = math.nan
    obstacle_from_bracket: bool = True
    details: dict = field(default_factory=dict)


def functional_J(problem: Problem, bg: BackgroundField, v) -> float:
    g = problem.graph
    v = g.function(v)
    lam, b = problem.lam, problem.b
    u = bg.u0 + v
    _check_exponent((b + 1.0) * u, "functional_J")
    potential = lam / (b + 1.0) * np.exp((b + 1.0) * u) - lam * np.exp(u)
    return 0.5 * dirichlet_energy(g, v) + integrate(g, potential) + problem.source_constant * integrate(g, v)


def grad_J(problem: Problem, bg: BackgroundField, v) -> np.ndarray:
    """``-Delta v + lam f(u0 + v) + 4 pi N/|V|``, i.e. ``-residual``."""
    g = problem.graph
    v = g.function(v)
    return -laplacian(g, v) + problem.lam * f_eval(problem.b, bg.u0 + v) + problem.source_constant


def hessian_matrix(problem: Problem, bg: BackgroundField, v):
    """Symmetric matrix ``L + M diag(lam f'(u0+v))`` representing ``mu * J''(v)``."""
    g = problem.graph
    d = problem.lam * f_prime(problem.b, bg.u0 + v)
    return (g.combinatorial_laplacian + sparse.diags(g.mu * d)).tocsr()


def _sup(x) -> float:
    return float(np.max(np.abs(x)))


def _mu_dot(problem, a, b) -> float:
    return float(problem.graph.mu @ (a * b))


def _safe_J(problem, bg, v) -> float:
    try:
        return functional_J(problem, bg, v)
    except OverflowError:
        return math.inf


def _newton_step(problem, bg, v, grad):
    H = hessian_matrix(problem, bg, v)
    rhs = problem.graph.mu * grad
    if problem.graph.n < 512:
        return la.solve(H.toarray(), rhs, assume_a="sym")
    return spla.spsolve(H.tocsc(), rhs)


def newton_polish(problem, bg, v, tol, max_steps=60):
    """Damped Newton on ``grad_J = 0``; accepts steps that reduce ``|grad J|``."""
    grad = grad_J(problem, bg, v)
    for k in range(max_steps):
        gn = _sup(grad)
        if gn < tol:
            return v, k, True
        try:
            step = _newton_step(problem, bg, v, grad)
        except (la.LinAlgError, RuntimeError):
            return v, k, False
        t = 1.0
        while t > 1e-6:
            trial = v - t * step
            try:
                g_trial = grad_J(problem, bg, trial)
            except OverflowError:
                g_trial = None
            if g_trial is not None and _sup(g_trial) < gn:
                v, grad = trial, g_trial
                break
            t *= 0.5
        else:
            return v, k, _sup(grad) < tol
    return v, max_steps, _sup(grad) < tol


def minimize_over_sigma(
    problem: Problem,
    bg: BackgroundField,
    obstacle: ObstacleSet,
    opts: DescentOptions = DescentOptions(),
    start=None,
) -> SolveReport:
    """Projected gradient descent for ``min J`` over ``{v >= v_star}``.

    Starts at ``v_star`` unless ``start`` is given. Steps use a
    Barzilai-Borwein trial length with Armijo backtracking, so every
    accepted step lowers ``J``. Once ``J`` differences reach rounding level
    and no constraint is active, damped Newton finishes the interior
    critical point.
    """
    g = problem.graph
    lo = obstacle.v_star
    v = np.maximum(lo, lo if start is None else g.function(start))
    Jv = functional_J(problem, bg, v)
    grad = grad_J(problem, bg, v)
    alpha = 1.0 / (2.0 * float(np.max(g.degree / g.mu)) + problem.lam * (problem.b + 1.0))
    stalled = False
    n = 0
    for n in range(1, opts.max_iterations + 1):
        pg = v - np.maximum(v - grad, lo)
        if _sup(pg) < opts.tolerance:
            break
        a = alpha
        while True:
            trial = np.maximum(v - a * grad, lo)
            d = trial - v
            J_trial = _safe_J(problem, bg, trial)
            if J_trial <= Jv + opts.armijo * _mu_dot(problem, grad, d):
                break
            a *= 0.5
            if a < 1e-14 * alpha:
                stalled = True
                break
        # equality means J differences are below rounding
        if stalled or J_trial >= Jv:
            break
        g_new = grad_J(problem, bg, trial)
        s, y = trial - v, g_new - grad
        sy = _mu_dot(problem, s, y)
        alpha = _mu_dot(problem, s, s) / sy if sy > 0 else 2.0 * a
        v, Jv, grad = trial, J_trial, g_new

    details = {"phase": "projected_gradient", "pg_iterations": n}
    active = int(np.sum(v <= lo))
    if _sup(grad_J(problem, bg, v)) >= opts.tolerance and opts.newton_polish and active == 0:
        v_new, steps, ok = newton_polish(problem, bg, v, opts.tolerance)
        if np.all(v_new > lo):
            v = v_new
            details.update(phase="newton_polish", newton_steps=steps)
    r = residual(problem, bg, v)
    converged = _sup(r) < max(opts.tolerance, 1e-9) and int(np.sum(v <= lo)) == 0
    u = bg.u0 + v
    details.update(
        active_set=int(np.sum(v <= lo)),
        min_gap_to_obstacle=float(np.min(v - lo)),
        J=functional_J(problem, bg, v),
    )
    return SolveReport(
        status=CONVERGED if converged else "failed",
        v=v if converged else None,
        iterations=n,
        final_residual_sup=_sup(r),
        monotone_violations=0,
        min_u0_plus_v=float(u.min()),
        max_u0_plus_v=float(u.max()),
        lam=problem.lam,
        reason="interior critical point" if converged else "obstacle active or tolerance not reached",
        details=details,
    )


def find_tau0(problem, bg, v, growth=2.0, max_steps=200) -> float:
    """Smallest ``tau = growth^k`` (k >= 0) with ``J(v - tau) < J(v) - 1``."""
    J0 = functional_J(problem, bg, v)
    tau = 1.0
    for _ in range(max_steps):
        if functional_J(problem, bg, v - tau) < J0 - 1.0:
            return tau
        tau *= growth
    raise VariationalError("no tau0 found: J does not drop along v - tau")


def _batch_grad(problem, bg, Z) -> np.ndarray:
    g = problem.graph
    lap = -(g.combinatorial_laplacian @ Z.T).T / g.mu
    return -lap + problem.lam * f_eval(problem.b, bg.u0 + Z) + problem.source_constant


def _batch_J(problem, bg, Z) -> np.ndarray:
    g = problem.graph
    lam, b = problem.lam, problem.b
    U = bg.u0 + Z
    _check_exponent((b + 1.0) * U, "functional_J")
    i, j = g.edge_index.T
    dirichlet = ((Z[:, j] - Z[:, i]) ** 2) @ g.weights
    potential = (lam / (b + 1.0) * np.exp((b + 1.0) * U) - lam * np.exp(U)) @ g.mu
    return 0.5 * dirichlet + potential + problem.source_constant * (Z @ g.mu)


def _reparametrize(Z, mu) -> np.ndarray:
    seg = np.sqrt(((np.diff(Z, axis=0) ** 2) @ mu))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return Z
    target = np.linspace(0.0, s[-1], len(Z))
    out = np.empty_like(Z)
    for k in range(Z.shape[1]):
        out[:, k] = np.interp(target, s, Z[:, k])
    return out


def mountain_pass(
    problem: Problem,
    bg: BackgroundField,
    minimizer,
    opts: MountainPassOptions = MountainPassOptions(),
) -> tuple[np.ndarray, float]:
    """Mountain-pass critical point between ``minimizer`` and ``minimizer - tau0``.

    The straight path from the minimizer to the low-energy endpoint
    ``minimizer - tau0`` is relaxed as a string: every interior point takes
    a gradient step, then the points are redistributed at equal arc
    length. If the whole interior sinks below ``J(minimizer)`` the pass is
    unresolved and the string restarts on the segment from the minimizer
    to its first interior point. Once the string has settled, its highest point climbs along
    the path tangent while descending across it. When the gradient there
    drops below ``opts.newton_switch`` it is refined by damped Newton to
    ``descent_tolerance``. Returns ``(saddle, c0)`` with ``c0 = J(saddle)``.
    """
    g = problem.graph
    m = g.function(minimizer)
    J_min = functional_J(problem, bg, m)
    tau0 = find_tau0(problem, bg, m, opts.tau_growth)
    ts = np.linspace(0.0, 1.0, opts.path_points)[:, None]
    Z = m[None, :] - ts * tau0
    truncations = 0
    switch = opts.newton_switch
    stiffness = 2.0 * float(np.max(g.degree / g.mu))
    climb = False
    prev_max = math.inf

    for k in range(opts.max_deformations):
        U = bg.u0 + Z
        curvature = problem.lam * (problem.b + 1.0) * float(np.exp((problem.b + 1.0) * np.minimum(U.max(), _EXP_CAP)))
        h = 0.5 / (stiffness + curvature)
        values = _batch_J(problem, bg, Z)
        G = _batch_grad(problem, bg, Z)
        i = int(np.argmax(values[1:-1])) + 1
        if values[i] <= J_min:
            # The barrier fell between the minimizer and Z[1]. Z[1] is lower
            # than the strict local minimum, so the straight segment to it
            # still crosses a pass: restart the string on that segment.
            truncations += 1
            Z = m[None, :] + ts * (Z[1] - m)[None, :]
            climb, prev_max = False, math.inf
            continue
        gn = _sup(G[i])
        if climb and (gn < switch or k % 500 == 0):
            saddle, steps, ok = newton_polish(problem, bg, Z[i], opts.descent_tolerance)
            if ok:
                c0 = functional_J(problem, bg, saddle)
                if c0 > J_min and _sup(saddle - m) > 1e-4:
                    log.info("mountain pass: %d sweeps, %d truncations, %d Newton steps", k, truncations, steps)
                    return saddle, c0
            if gn < switch:
                switch *= 0.1
        step = -h * G[1:-1]
        if climb:
            t = Z[i + 1] - Z[i - 1]
            t /= math.sqrt(_mu_dot(problem, t, t))
            step[i - 1] = -h * (G[i] - 2.0 * _mu_dot(problem, G[i], t) * t)
        Z[1:-1] += step
        if climb:
            # the climbing image stays put; each side is redistributed alone
            Z[: i + 1] = _reparametrize(Z[: i + 1], g.mu)
            Z[i:] = _reparametrize(Z[i:], g.mu)
        else:
            Z = _reparametrize(Z, g.mu)
        if not climb and k % 50 == 49:
            # string has settled once the path maximum stops moving
            top = float(values.max())
            climb = abs(prev_max - top) < 1e-6 * max(1.0, abs(top))
            prev_max = top
    raise VariationalError(f"mountain pass did not converge in {opts.max_deformations} sweeps")


def find_two_solutions(
    problem: Problem,
    bg: BackgroundField,
    lambda_c_result: CriticalLambdaResult,
    *,
    monotone_opts: MonotoneOptions = MonotoneOptions(),
    descent_opts: DescentOptions = DescentOptions(),
    pass_opts: MountainPassOptions = MountainPassOptions(),
    separation_threshold: float = 1e-6,
    residual_tolerance: float = 1e-6,
) -> MultiplicityResult:
    """Two distinct solutions for a coupling above the critical one.

    The obstacle is the maximal solution at the solvable end of the
    critical bracket. If the maximal solution and the constrained
    minimizer differ, both are returned; otherwise the second solution is
    a mountain-pass point from the shared minimizer.
    """
    lam_star = lambda_c_result.bracket[1]
    if not problem.lam > lam_star:
        raise ValueError(f"lambda={problem.lam} must exceed the critical bracket {lam_star}")

    maximal = iterate_scheme(problem, bg, monotone_opts)
    if not maximal.converged:
        raise VariationalError(f"maximal solution: monotone scheme ended {maximal.status}")
    try:
        star = solve_at_critical(problem.with_lambda(lam_star), bg, monotone_opts)
    except RuntimeError as exc:
        raise VariationalError(f"critical solution: {exc}") from exc
    obstacle = ObstacleSet(star.v, lam_star, from_bracket=True)

    w_rep = minimize_over_sigma(problem, bg, obstacle, descent_opts)
    if not w_rep.converged:
        raise VariationalError(f"constrained minimization failed: {w_rep.reason}")
    w = w_rep.v
    v_max = maximal.v
    J_w = functional_J(problem, bg, w)
    details = {"minimize": w_rep.details, "maximal_iterations": maximal.iterations}

    if _sup(v_max - w) > separation_threshold:
        route, second, c0 = DISTINCT_MAXIMAL, v_max, None
    else:
        second, c0 = mountain_pass(problem, bg, w, pass_opts)
        route = MOUNTAIN_PASS
        details["tau0"] = find_tau0(problem, bg, w, pass_opts.tau_growth)

    res_w = _sup(residual(problem, bg, w))
    res_s = _sup(residual(problem, bg, second))
    if max(res_w, res_s) >= residual_tolerance:
        raise VariationalError(f"solutions not verified: residuals {res_w:.2e}, {res_s:.2e}")
    return MultiplicityResult(
        minimizer=w,
        second=second,
        J_min=J_w,
        J_second=functional_J(problem, bg, second),
        c0=c0,
        route=route,
        separation_sup=_sup(second - w),
        residual_minimizer=res_w,
        residual_second=res_s,
        lam=problem.lam,
        obstacle_lambda=lam_star,
        obstacle_from_bracket=obstacle.from_bracket,
        details=details,
    )
