"""Reference computations that avoid the package's solvers.

Everything here is built from dense numpy/scipy primitives so the tests
compare two independent routes to the same numbers.
"""

import math

import numpy as np
from scipy.optimize import brentq, fsolve


def dense_laplacian(g):
    """Dense matrix of the mu-Laplacian assembled edge by edge."""
    n = g.n
    A = np.zeros((n, n))
    for (i, j), w in zip(g.edge_index, g.weights):
        A[i, j] += w
        A[j, i] += w
        A[i, i] -= w
        A[j, j] -= w
    return A / g.mu[:, None]


def dense_u0(g, points):
    """Mean-zero background field via the pseudoinverse of the Laplacian."""
    rhs = np.full(g.n, -4.0 * math.pi * len(points) / g.mu.sum())
    for p in points:
        rhs[g.index[p]] += 4.0 * math.pi / g.mu[g.index[p]]
    u = np.linalg.pinv(dense_laplacian(g)) @ rhs
    return u - (g.mu @ u) / g.mu.sum()


def f_ref(b, t):
    return np.exp((b + 1.0) * t) - np.exp(t)


def f_prime_ref(b, t):
    return (b + 1.0) * np.exp((b + 1.0) * t) - np.exp(t)


def fold_point(g, points, b, v_guess, lam_guess):
    """Critical coupling as the fold of the solution branch.

    Solves ``F(v, lam) = 0``, ``F_v phi = 0``, ``sum(phi) = 1`` with fsolve.
    Returns ``(lam_c, v_c, residual)``.
    """
    n = g.n
    L = dense_laplacian(g)
    u0 = dense_u0(g, points)
    c = 4.0 * math.pi * len(points) / g.mu.sum()

    def F(z):
        v, phi, lam = z[:n], z[n:2 * n], z[-1]
        u = u0 + v
        r1 = L @ v - lam * f_ref(b, u) - c
        r2 = L @ phi - lam * f_prime_ref(b, u) * phi
        return np.concatenate([r1, r2, [phi.sum() - 1.0]])

    z = fsolve(F, np.concatenate([v_guess, np.full(n, 1.0 / n), [lam_guess]]), xtol=1e-14)
    return z[-1], z[:n], float(np.abs(F(z)).max())


def k2_solutions(lam, b=1.0, lo=-40.0, hi=2.0, samples=400_001):
    """All solutions ``u = (u1, u2)`` on unit K2 with one vortex at the first vertex.

    The equations reduce to ``u2 = u1 + 4 pi + lam f(u1)`` together with
    ``f(u1) + f(u2) = -4 pi / lam``; roots in ``u1`` are bracketed on a grid
    and refined with brentq. Sorted by decreasing ``u1``.
    """
    def h(u1):
        u2 = u1 + 4.0 * math.pi + lam * f_ref(b, u1)
        if u2 > 300:
            return math.inf
        return f_ref(b, u1) + f_ref(b, u2) + 4.0 * math.pi / lam

    grid = np.linspace(lo, hi, samples)
    u2 = grid + 4.0 * math.pi + lam * f_ref(b, grid)
    with np.errstate(over="ignore"):
        vals = np.where(u2 > 300, np.inf, f_ref(b, grid) + f_ref(b, np.minimum(u2, 300)) + 4.0 * math.pi / lam)
    s = np.sign(vals)
    idx = np.nonzero(np.isfinite(vals[:-1]) & np.isfinite(vals[1:]) & (s[:-1] * s[1:] < 0))[0]
    roots = [brentq(h, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15) for k in idx]
    sols = [np.array([r, r + 4.0 * math.pi + lam * f_ref(b, r)]) for r in roots]
    return sorted(sols, key=lambda u: -u[0])
