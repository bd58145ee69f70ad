# %% [markdown]
# # The critical coupling
#
# Solvable couplings form an interval `[lambda_c, inf)`. Bisection with the
# monotone scheme as oracle brackets `lambda_c`; the necessary bound from
# integrating the equation sits below it.

# %%
from chern_simons_graph import VortexSet, bisect
from chern_simons_graph.fixtures import fixture

for name, p in (("k2", "x1"), ("path4", "p0"), ("torus4x4", "t00")):
    g = fixture(name)
    for b in (1.0, 2.0):
        res = bisect(g, VortexSet((p,)), b)
        lo, hi = res.bracket
        print(
            f"{name:9s} b={b:g}: lambda_c ~ {res.lambda_c:10.5f} in [{lo:.5f}, {hi:.5f}], "
            f"bound {res.lower_bound_derived:9.5f}, {res.oracle_calls} oracle calls"
        )

# %% [markdown]
# On K2 the gap between the bound (8 pi ~ 25.1) and lambda_c (~ 47.47) is
# large: a coupling such as 40 passes the necessary test but has no
# solution.

# %%
from chern_simons_graph import Problem, compute_u0, iterate_scheme

g = fixture("k2")
vs = VortexSet(("x1",))
print(iterate_scheme(Problem(g, vs, 40.0, 1.0), compute_u0(g, vs)).reason)
