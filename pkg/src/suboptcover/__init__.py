"""Suboptimal covers for multi-task LQR families in decomposed dynamics form."""

from .care import (
    CareSolution,
    eval_cost,
    is_hurwitz,
    lqr_synthesize,
    solve_care_maximal,
    solve_lyapunov,
)
from .cover import (
    CoverResult,
    GeometricGrid,
    GridCell,
    build_cover,
    certify_cell,
    corner_diagnostics,
    covering_curve,
    gcc_conservativeness,
    partition_grid,
)
from .ddf import (
    DdfProblem,
    assemble_b,
    make_coupling,
    make_quadrotor,
    make_scalar,
    optimal_cost,
    with_theta,
)
from .errors import (
    CareNoSolutionError,
    CertificationFailureError,
    CoverConstructionError,
    CoverNotFoundError,
    GccInfeasibleError,
    NumericalFailureError,
    SuboptCoverError,
    UncontrollablePairError,
    UnstableClosedLoopError,
)
from .gcc import (
    CellEncoding,
    GccSolution,
    encode_cell,
    solve_gcc_riccati,
    synthesize_gcc,
    verify_cell_guarantee,
)
from .neighborhood import alpha_sweep, components, compute_field
from .scalar import (
    ScalarCover,
    build_scalar_cover,
    lower_bound_count,
    neighborhood_interval,
    overestimate_interval,
    scalar_cost_ratio,
    scalar_optimal,
)

__version__ = "0.1.0"
