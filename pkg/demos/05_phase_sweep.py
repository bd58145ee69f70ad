# %% [markdown]
# # A sweep in lambda
#
# The sweep reports, for each coupling, the maximal solution's mean and
# energy and the ratio `||grad v||_2 / lambda`. The ratio stays bounded.
# On the 4x4 torus the maximal solution jumps to a higher branch near
# lambda ~ 37, which shows up as a kink in every column.

# %%
import numpy as np

from chern_simons_graph import VortexSet, bisect, sweep
from chern_simons_graph.fixtures import fixture

g = fixture("torus4x4")
vs = VortexSet(("t00",))
crit = bisect(g, vs, 1.0)
rows = sweep(g, vs, 1.0, np.linspace(crit.bracket[1], 10 * crit.lambda_c, 16), jobs=4)

print(f"{'lambda':>9s} {'iters':>6s} {'mean v':>9s} {'J':>11s} {'ratio':>7s}")
for r in rows:
    print(f"{r.lam:9.4f} {r.iterations:6d} {r.mean_v:9.5f} {r.J:11.4f} {r.grad_norm_ratio:7.4f}")
print("max ratio:", max(r.grad_norm_ratio for r in rows))

# %% [markdown]
# The same table comes from the command line:
#
#     chern-simons-graph sweep --graph torus4x4.json --vortex t00 --b 1 \
#         --lambda-min 3.91 --lambda-max 39 --steps 16 --jobs 4 --format tsv
