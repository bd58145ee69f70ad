import math

import numpy as np
import pytest

from chern_simons_graph import (
    DescentOptions,
    ObstacleSet,
    Problem,
    VortexSet,
    bisect,
    compute_u0,
    find_two_solutions,
    functional_J,
    grad_J,
    iterate_scheme,
    minimize_over_sigma,
    residual,
    solve_at_critical,
)
from chern_simons_graph.fixtures import fixture
from chern_simons_graph.variational import find_tau0, hessian_matrix

from _oracles import k2_solutions


def setup(name, points, lam, b=1.0):
    g = fixture(name)
    vs = VortexSet(points)
    return Problem(g, vs, lam, b), compute_u0(g, vs)


def test_J_at_minus_u0_on_k2():
    for lam in (1.0, 30.0):
        problem, bg = setup("k2", ("x1",), lam)
        # u = 0: Dirichlet part 2 pi^2, potential lam (1/2 - 1) at both vertices
        assert functional_J(problem, bg, -bg.u0) == pytest.approx(2 * math.pi**2 - lam, rel=1e-14)


def test_grad_J_is_minus_residual():
    problem, bg = setup("petersen_weighted", ("i0", "o3"), 9.0, 2.0)
    v = np.random.default_rng(1).standard_normal(problem.graph.n) - 1.0
    assert np.allclose(grad_J(problem, bg, v), -residual(problem, bg, v), atol=1e-14)


@pytest.mark.parametrize("name, p", [("k2_weighted", "x2"), ("torus4x4_weighted", "t13"), ("petersen", "o0")])
def test_grad_and_hessian_finite_differences(name, p, rng):
    problem, bg = setup(name, (p,), 7.5, 1.5)
    g = problem.graph
    v = rng.standard_normal(g.n) - 1.0
    gr = grad_J(problem, bg, v)
    H = hessian_matrix(problem, bg, v).toarray()
    assert np.allclose(H, H.T)
    for _ in range(10):
        d = rng.standard_normal(g.n)
        h = 1e-5
        fd = (functional_J(problem, bg, v + h * d) - functional_J(problem, bg, v - h * d)) / (2 * h)
        assert float(g.mu @ (gr * d)) == pytest.approx(fd, rel=1e-6, abs=1e-8)
        # mu-weighted Hessian action equals the directional derivative of mu * grad
        fd2 = (g.mu * (grad_J(problem, bg, v + h * d) - grad_J(problem, bg, v - h * d))) / (2 * h)
        assert np.allclose(H @ d, fd2, rtol=1e-6, atol=1e-6)


def test_minimizer_stays_above_obstacle():
    problem, bg = setup("torus4x4", ("t00",), 4.5)
    star = iterate_scheme(problem.with_lambda(4.0), bg).v
    rep = minimize_over_sigma(problem, bg, ObstacleSet(star, 4.0))
    assert rep.converged
    assert np.all(rep.v > star)
    assert rep.final_residual_sup < 1e-9
    assert rep.details["J"] <= functional_J(problem, bg, star)


def test_find_tau0_lowers_energy():
    problem, bg = setup("k2", ("x1",), 50.0)
    v = iterate_scheme(problem, bg).v
    tau = find_tau0(problem, bg, v)
    assert tau >= 1.0
    assert functional_J(problem, bg, v - tau) < functional_J(problem, bg, v) - 1.0


@pytest.fixture(scope="module")
def k2_pair():
    g = fixture("k2")
    vs = VortexSet(("x1",))
    crit = bisect(g, vs, 1.0)
    problem = Problem(g, vs, 1.01 * crit.lambda_c, 1.0)
    bg = compute_u0(g, vs)
    return problem, bg, crit, find_two_solutions(problem, bg, crit)


def test_k2_two_solutions_match_reduction_oracle(k2_pair):
    problem, bg, _, res = k2_pair
    sols = k2_solutions(problem.lam)
    assert len(sols) == 2
    got = sorted([bg.u0 + res.minimizer, bg.u0 + res.second], key=lambda u: -u[0])
    for u, ref in zip(got, sols):
        assert np.allclose(u, ref, atol=1e-7)


def test_k2_mountain_pass_level(k2_pair):
    problem, bg, crit, res = k2_pair
    assert res.route == "mountain_pass"
    assert res.c0 > res.J_min
    assert res.J_second == pytest.approx(res.c0)
    assert res.separation_sup > 1e-4
    assert max(res.residual_minimizer, res.residual_second) < 1e-6
    assert res.obstacle_lambda == crit.bracket[1]
    star = solve_at_critical(problem.with_lambda(crit.bracket[1]), bg).v
    assert np.all(res.minimizer > star)


def test_coupling_must_exceed_bracket(k2_pair):
    problem, bg, crit, _ = k2_pair
    with pytest.raises(ValueError):
        find_two_solutions(problem.with_lambda(crit.bracket[0]), bg, crit)


def test_descent_reports_failure_when_capped():
    problem, bg = setup("torus4x4", ("t00",), 4.5)
    star = iterate_scheme(problem.with_lambda(4.0), bg).v
    rep = minimize_over_sigma(problem, bg, ObstacleSet(star, 4.0), DescentOptions(max_iterations=2, newton_polish=False))
    assert not rep.converged and rep.v is None

