# %% [markdown]
# # Two solutions above the critical coupling
#
# Above `lambda_c` the energy `J` has a local minimizer over the set of
# functions lying above the critical solution. A second solution comes
# either from the maximal solution (when it differs) or from a mountain
# pass between the minimizer and a far point of lower energy.

# %%
from chern_simons_graph import Problem, VortexSet, bisect, compute_u0, find_two_solutions
from chern_simons_graph.fixtures import fixture

for name, p in (("k2", "x1"), ("torus4x4", "t00")):
    g = fixture(name)
    vs = VortexSet((p,))
    crit = bisect(g, vs, 1.0)
    problem = Problem(g, vs, 1.01 * crit.lambda_c, 1.0)
    res = find_two_solutions(problem, compute_u0(g, vs), crit)
    print(f"{name}: lambda = {problem.lam:.5f}, route {res.route}")
    print(f"  J(minimizer) = {res.J_min:.6f}   J(second) = {res.J_second:.6f}")
    print(f"  separation {res.separation_sup:.4f}, residuals {res.residual_minimizer:.1e} / {res.residual_second:.1e}")
    print(f"  minimizer stays {res.details['minimize']['min_gap_to_obstacle']:.3e} above the obstacle")
