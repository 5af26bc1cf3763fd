"""Exception hierarchy for solver and cover failures.

Domain violations (bad arguments, out-of-range parameters) raise plain
ValueError; the classes here mark *numerical* outcomes that callers may
want to catch and handle, e.g. treating an infeasible GCC cell as "retry
with a finer grid" rather than a crash.
"""


class SuboptCoverError(Exception):
    """Base class for all package-specific errors."""


class NumericalFailureError(SuboptCoverError):
    """An underlying dense linear-algebra routine failed to converge."""


class UnstableClosedLoopError(SuboptCoverError):
    """A Lyapunov solve was requested for a non-Hurwitz closed loop."""


class CareNoSolutionError(SuboptCoverError):
    """The algebraic Riccati equation has no stabilizing PSD solution."""


class UncontrollablePairError(CareNoSolutionError):
    """LQR synthesis failed; the pair (A, B) admits no finite cost."""


class GccInfeasibleError(SuboptCoverError):
    """No scaling parameter makes the guaranteed-cost Riccati solvable."""


class CertificationFailureError(SuboptCoverError):
    """A sampled cost exceeded its certified bound; indicates a solver bug."""


class CoverConstructionError(SuboptCoverError):
    """The scalar cover bisection found no feasible contraction ratio."""


class CoverNotFoundError(SuboptCoverError):
    """Grid refinement exhausted ``max_pitch`` without certifying a cover."""

    def __init__(self, message, failing_cells=None, attempts=None):
        super().__init__(message)
        self.failing_cells = failing_cells or []
        self.attempts = attempts or []
