"""Linear solves against the mu-Laplacian.

All systems are symmetrized by multiplying through by the measure: with
``L = D - W`` the combinatorial Laplacian and ``M = diag(mu)`` we have
``Delta = -M^{-1} L``, so ``(Delta - K) w = f`` becomes ``(L + K M) w = -M f``,
which is symmetric positive definite for ``K > 0``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy import sparse
from scipy.sparse import linalg as spla

from .graph import FiniteGraph, integrate, laplacian


class LinearSolveError(RuntimeError):
    pass


class IncompatibleDataError(LinearSolveError, ValueError):
    """Poisson data with nonzero integral (outside the range of Delta)."""


@dataclass(frozen=True)
class LinearSolveOptions:
    tolerance: float = 1e-12
    max_iterations: int = 10_000
    dense_threshold: int = 512

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_OPTIONS = LinearSolveOptions()


def _sup(x) -> float:
    return float(np.max(np.abs(x))) if len(x) else 0.0


def _cg(A, rhs, x0, opts: LinearSolveOptions, check):
    """Jacobi-preconditioned CG with a few restarts until ``check(x)`` holds."""
    diag = A.diagonal()
    precond = spla.LinearOperator(A.shape, matvec=lambda r: r / diag)
    x = x0
    rtol = min(1e-3 * opts.tolerance, 1e-14)
    for _ in range(4):
        x, info = spla.cg(A, rhs, x0=x, rtol=rtol, atol=0.0, maxiter=opts.max_iterations, M=precond)
        if check(x):
            return x
        rtol = max(rtol * 1e-2, 1e-16)
    raise LinearSolveError(f"conjugate gradient did not reach tolerance (info={info})")


class ShiftedSolver:
    """Reusable solver for ``(Delta - K) w = f`` on a fixed graph.

    Dense Cholesky below ``opts.dense_threshold`` vertices, CG above.
    The object is immutable once built and safe to share between threads.
    """

    def __init__(self, g: FiniteGraph, K: float, opts: LinearSolveOptions = DEFAULT_OPTIONS):
        if not K > 0:
            raise ValueError(f"shift K must be positive, got {K}")
        self.g = g
        self.K = float(K)
        self.opts = opts
        A = (g.combinatorial_laplacian + self.K * sparse.diags(g.mu)).tocsr()
        self._A = A
        self._chol = la.cho_factor(A.toarray()) if g.n < opts.dense_threshold else None

    def residual(self, w, f) -> np.ndarray:
        return laplacian(self.g, w) - self.K * w - f

    def _ok(self, w, f) -> bool:
        return _sup(self.residual(w, f)) <= self.opts.tolerance * max(1.0, _sup(f))

    def solve(self, f, check: bool = True) -> np.ndarray:
        f = self.g.function(f)
        rhs = -self.g.mu * f
        if self._chol is not None:
            w = la.cho_solve(self._chol, rhs)
            if check and not self._ok(w, f):
                # one step of iterative refinement
                w = w + la.cho_solve(self._chol, -self.g.mu * self.residual(w, f))
                if not self._ok(w, f):
                    raise LinearSolveError(
                        f"shifted solve residual {_sup(self.residual(w, f)):.3e} above tolerance"
                    )
            return w
        return _cg(self._A, rhs, -f / self.K, self.opts, lambda w: self._ok(w, f))


_cache_lock = threading.Lock()
_cache: dict[tuple[int, float, LinearSolveOptions], ShiftedSolver] = {}


def shifted_solver(g: FiniteGraph, K: float, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> ShiftedSolver:
    """Cached :class:`ShiftedSolver` keyed on graph identity and shift."""
    key = (id(g), float(K), opts)
    with _cache_lock:
        solver = _cache.get(key)
        if solver is not None and solver.g is g:
            return solver
    solver = ShiftedSolver(g, K, opts)
    with _cache_lock:
        if len(_cache) > 64:
            _cache.clear()
        _cache[key] = solver
    return solver


def solve_shifted(g: FiniteGraph, K: float, f, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """Solve ``(Delta - K) w = f`` for ``K > 0``."""
    return shifted_solver(g, K, opts).solve(f)


def solve_poisson_mean_zero(g: FiniteGraph, f, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """Solve ``Delta w = f`` with ``int w dmu = 0``.

    ``f`` must integrate to zero up to ``1e-9 * |f|_inf * |V|``; the
    remaining rounding noise is projected out before solving.
    """
    f = g.function(f)
    vol = g.volume
    mean = integrate(g, f)
    if abs(mean) > 1e-9 * max(_sup(f), 1e-300) * vol:
        raise IncompatibleDataError(f"Poisson data is incompatible: integral {mean:.3e} != 0")
    f = f - mean / vol
    rhs = -g.mu * f

    def ok(w):
        return _sup(laplacian(g, w) - f) <= opts.tolerance * max(1.0, _sup(f))

    if g.n < opts.dense_threshold:
        # L + m m^T / |V| is SPD and agrees with L on the mean-zero subspace
        A = g.combinatorial_laplacian.toarray() + np.outer(g.mu, g.mu) / vol
        w = la.solve(A, rhs, assume_a="pos")
        w -= integrate(g, w) / vol
        if not ok(w):
            w += la.solve(A, -g.mu * (laplacian(g, w) - f), assume_a="pos")
            w -= integrate(g, w) / vol
            if not ok(w):
                raise LinearSolveError("Poisson solve did not reach tolerance")
        return w

    def ok_projected(w):
        return ok(w - integrate(g, w) / vol)

    w = _cg(g.combinatorial_laplacian, rhs, np.zeros(g.n), opts, ok_projected)
    return w - integrate(g, w) / vol


def spectral_gap(g: FiniteGraph, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> float:
    """Smallest nonzero eigenvalue of ``-Delta`` (self-adjoint in L^2(mu))."""
    if g.n < 2:
        raise LinearSolveError("spectral gap undefined for a single vertex")
    # ARPACK needs k < n, so tiny graphs always take the dense route
    if g.n < max(opts.dense_threshold, 4):
        vals = la.eigh(
            g.combinatorial_laplacian.toarray(), np.diag(g.mu), eigvals_only=True, subset_by_index=[0, 1]
        )
        return float(vals[1])
    try:
        vals = spla.eigsh(
            g.combinatorial_laplacian.tocsc(),
            k=2,
            M=sparse.diags(g.mu).tocsc(),
            sigma=-1e-6 * float(g.degree.max() / g.mu.max()),
            which="LM",
            tol=opts.tolerance,
            maxiter=opts.max_iterations,
            return_eigenvectors=False,
        )
    except spla.ArpackNoConvergence as exc:
        raise LinearSolveError(f"eigensolver did not converge: {exc}") from None
    return float(np.sort(vals)[1])


def poincare_constant(g: FiniteGraph, opts: LinearSolveOptions = DEFAULT_OPTIONS) -> float:
    """Best constant ``C`` in ``int u^2 <= C int |grad u|^2`` for mean-zero ``u``."""
    return 1.0 / spectral_gap(g, opts)
