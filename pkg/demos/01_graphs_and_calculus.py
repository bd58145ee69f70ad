# %% [markdown]
# # Graphs, measures and discrete calculus
#
# A graph carries a vertex measure `mu` and symmetric edge weights `w`.
# The Laplacian divides by `mu`, so integrals are `mu`-weighted sums.

# %%
import numpy as np

from chern_simons_graph import (
    VortexSet,
    compute_u0,
    dirichlet_energy,
    gradient_form,
    integrate,
    laplacian,
    poincare_constant,
    spectral_gap,
)
from chern_simons_graph.fixtures import fixture, fixture_names

g = fixture("petersen_weighted")
print(g)
print("total measure |V| =", g.volume)

# %% [markdown]
# Integration by parts holds exactly (up to rounding) on any graph.

# %%
rng = np.random.default_rng(0)
u, v = rng.standard_normal((2, g.n))
print("int Gamma(u, v)  =", integrate(g, gradient_form(g, u, v)))
print("-int u Delta v   =", -integrate(g, u * laplacian(g, v)))
print("int Delta u      =", integrate(g, laplacian(g, u)))

# %% [markdown]
# The spectral gap of `-Delta` gives the sharp Poincare constant.

# %%
for name in fixture_names():
    h = fixture(name)
    print(f"{name:20s} gap {spectral_gap(h):9.5f}   C {poincare_constant(h):8.5f}")

w = rng.standard_normal(g.n)
w -= integrate(g, w) / g.volume
print("int w^2 / int |grad w|^2 =", integrate(g, w * w) / dirichlet_energy(g, w), "<=", poincare_constant(g))

# %% [markdown]
# The background field absorbs the vortex masses. On K2 with one vortex
# it is exactly `(-pi, pi)`.

# %%
bg = compute_u0(fixture("k2"), VortexSet(("x1",)))
print("u0 on K2:", bg.u0, "  pi =", np.pi)
