"""Multi-task LQR families in decomposed dynamics form.

A family is a tuple (A, U, V, theta): the input matrix ranges over
``B(sigma) = U diag(sigma) V'`` with ``sigma in [1/theta, 1]^d``.  The
``theta`` knob sweeps the task space from a singleton (theta = 1) to
arbitrarily broad authority ranges.  Concrete instances: the scalar family,
the minimum/maximum-coupling test families, and a linearized quadrotor.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .care import CareSolution, lqr_synthesize

__all__ = [
    "DdfProblem",
    "assemble_b",
    "check_sigma",
    "optimal_cost",
    "optimal_policy",
    "make_scalar",
    "make_coupling",
    "make_quadrotor",
    "with_theta",
    "problem_to_dict",
    "problem_from_dict",
    "load_problem",
    "dump_problem",
    "PRESETS",
]

_RANK_TOL = 1e-10
_BOUNDS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class DdfProblem:
    """Immutable description of one decomposed-dynamics family.

    Invariants enforced at construction: U and V have full column rank d
    with 0 < d <= min(n, m), theta >= 1, and the worst-authority system
    ``B((1/theta) * ones)`` admits a finite-cost regulator.
    """

    a: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: float
    name: str = "ddf"

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "u", np.atleast_2d(np.asarray(self.u, dtype=float)))
        object.__setattr__(self, "v", np.atleast_2d(np.asarray(self.v, dtype=float)))
        object.__setattr__(self, "theta", float(self.theta))
        for label, mat in (("A", self.a), ("U", self.u), ("V", self.v)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{label} must have finite entries")
        n, m, d = self.n, self.m, self.d
        if self.a.shape != (n, n):
            raise ValueError(f"A must be square, got {self.a.shape}")
        if self.v.shape[1] != d:
            raise ValueError("U and V must have the same number of columns")
        if not 0 < d <= min(n, m):
            raise ValueError(f"need 0 < d <= min(n, m), got d={d}, n={n}, m={m}")
        for label, mat in (("U", self.u), ("V", self.v)):
            svals = np.linalg.svd(mat, compute_uv=False)
            if svals[-1] <= _RANK_TOL * svals[0]:
                raise ValueError(f"{label} must have full column rank {d}")
        if self.theta < 1.0:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        # Worst-authority feasibility: the minimal corner is the binding case
        # for cost, so one solve certifies the whole family is controllable
        # enough to cover.
        lqr_synthesize(self.a, assemble_b(self, self.sigma_min()))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.v.shape[0]

    @property
    def d(self) -> int:
        return self.u.shape[1]

    def sigma_min(self) -> np.ndarray:
        return np.full(self.d, 1.0 / self.theta)

    def sigma_max(self) -> np.ndarray:
        return np.ones(self.d)


def check_sigma(problem: DdfProblem, sigma) -> np.ndarray:
    """Validate a task point against the family's componentwise bounds."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sigma.shape != (problem.d,):
        raise ValueError(f"sigma must have shape ({problem.d},), got {sigma.shape}")
    lo = 1.0 / problem.theta
    slack = _BOUNDS_SLACK * max(1.0, problem.theta)
    if np.any(sigma < lo - slack) or np.any(sigma > 1.0 + _BOUNDS_SLACK):
        raise ValueError(
            f"sigma {sigma} outside [{lo}, 1]^{problem.d} for theta={problem.theta}"
        )
    return np.clip(sigma, lo, 1.0)


def assemble_b(problem: DdfProblem, sigma) -> np.ndarray:
    """Input matrix ``U diag(sigma) V'`` for one task point."""
    sigma = check_sigma(problem, sigma)
    return (problem.u * sigma) @ problem.v.T


def optimal_policy(problem: DdfProblem, sigma) -> CareSolution:
    """LQR-optimal value/gain/cost for the single task ``sigma``."""
    return lqr_synthesize(problem.a, assemble_b(problem, sigma))


def optimal_cost(problem: DdfProblem, sigma) -> float:
    """Optimal reference cost of the task ``sigma``; strictly positive."""
    return optimal_policy(problem, sigma).cost


def make_scalar(a: float, theta: float) -> DdfProblem:
    """Scalar family: dynamics a > 0, authority interval [1/theta, 1]."""
    if a <= 0:
        raise ValueError(f"scalar family needs a > 0, got {a}")
    return DdfProblem(
        a=np.array([[float(a)]]),
        u=np.array([[1.0]]),
        v=np.array([[1.0]]),
        theta=theta,
        name="scalar",
    )


def make_coupling(d: int, kind: str, theta: float) -> DdfProblem:
    """Coupling test families: A = I (min) or A = (1/n) * ones (max).

    Both use n = m = d and U = V = I, so the input matrix is diag(sigma).
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if kind == "min":
        a = np.eye(d)
    elif kind == "max":
        a = np.full((d, d), 1.0 / d)
    else:
        raise ValueError(f"kind must be 'min' or 'max', got {kind!r}")
    return DdfProblem(
        a=a, u=np.eye(d), v=np.eye(d), theta=theta, name=f"{kind}_coupling"
    )


def make_quadrotor(
    g: float = 1.0, column_scales=None, theta: float = 10.0
) -> DdfProblem:
    """Linearized quadrotor at hover with four authority parameters.

    State (n = 12): position, velocity, attitude angles, angular velocity.
    Inputs (m = 4): squared propeller speeds.  The d = 4 sigma components
    are the thrust, roll, pitch, and yaw authorities; their maximum values
    can be varied through ``column_scales`` (default all ones).

    The default gravity constant is 1 (nondimensionalized units); pass
    g = 9.81 for SI second/meter scaling.
    """
    if g <= 0:
        raise ValueError(f"need g > 0, got {g}")
    scales = np.ones(4) if column_scales is None else np.asarray(column_scales, float)
    if scales.shape != (4,) or np.any(scales <= 0):
        raise ValueError("column_scales must be 4 positive values")

    a = np.zeros((12, 12))
    a[0:3, 3:6] = np.eye(3)
    a[3:6, 6:9] = np.array([[0.0, g, 0.0], [-g, 0.0, 0.0], [0.0, 0.0, 0.0]])
    a[6:9, 9:12] = np.eye(3)

    u = np.zeros((12, 4))
    u[5, 0] = 1.0  # thrust acts on vertical acceleration
    u[9:12, 1:4] = np.eye(3)
    u = u * scales

    # +-1 mixing of the four propellers into thrust/roll/pitch/yaw.
    v_t = np.array(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0, 1.0],
            [-1.0, -1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
        ]
    )
    return DdfProblem(a=a, u=u, v=v_t.T, theta=theta, name="quadrotor")


def with_theta(problem: DdfProblem, theta: float) -> DdfProblem:
    """Same (A, U, V) with a different breadth."""
    return dataclasses.replace(problem, theta=theta)


def problem_to_dict(problem: DdfProblem) -> dict:
    return {
        "A": problem.a.tolist(),
        "U": problem.u.tolist(),
        "V": problem.v.tolist(),
        "theta": problem.theta,
        "name": problem.name,
    }


def problem_from_dict(doc: dict) -> DdfProblem:
    return DdfProblem(
        a=np.asarray(doc["A"], dtype=float),
        u=np.asarray(doc["U"], dtype=float),
        v=np.asarray(doc["V"], dtype=float),
        theta=float(doc["theta"]),
        name=str(doc.get("name", "ddf")),
    )


def dump_problem(problem: DdfProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_problem(path) -> DdfProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


#: CLI preset registry: name -> factory(theta, **kwargs).
PRESETS = {
    "scalar": lambda theta, a=1.0, **_: make_scalar(a, theta),
    "min_coupling": lambda theta, d=2, **_: make_coupling(int(d), "min", theta),
    "max_coupling": lambda theta, d=2, **_: make_coupling(int(d), "max", theta),
    "quadrotor": lambda theta, g=1.0, column_scales=None, **_: make_quadrotor(
        g, column_scales, theta
    ),
}
