"""Solvers for the generalized Chern-Simons vortex equation on finite graphs.

``Delta u = lam e^u (e^{bu} - 1) + 4 pi sum_j delta_{p_j}`` on a connected
weighted graph: maximal solutions by monotone iteration, the critical
coupling by bisection, and a second solution above it by constrained
minimization plus a numerical mountain pass.
"""

from .critical import BracketError, CriticalLambdaResult, SweepRow, bisect, sweep, upper_bracket
from .graph import (
    FiniteGraph,
    GraphError,
    VortexSet,
    dirac_mass,
    dirichlet_energy,
    grad_norm,
    gradient_form,
    integrate,
    laplacian,
    vortex_source,
)
from .linalg import (
    IncompatibleDataError,
    LinearSolveError,
    LinearSolveOptions,
    poincare_constant,
    solve_poisson_mean_zero,
    solve_shifted,
    spectral_gap,
)
from .monotone import (
    MonotoneOptions,
    SolveReport,
    compute_u0,
    iterate_scheme,
    solve_at_critical,
    verify_maximum_principle,
)
from .nonlinearity import (
    BackgroundField,
    Problem,
    classify_sub_super,
    f_eval,
    f_min,
    f_prime,
    lambda_lower_bound,
    residual,
)
from .serialize import dumps, load_solution, write_solution
from .variational import (
    DescentOptions,
    MountainPassOptions,
    MultiplicityResult,
    ObstacleSet,
    VariationalError,
    find_two_solutions,
    functional_J,
    grad_J,
    minimize_over_sigma,
    mountain_pass,
)

__all__ = [name for name in dir() if not name.startswith("_")]
