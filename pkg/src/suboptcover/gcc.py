"""Guaranteed cost control for norm-bounded input-matrix uncertainty.

One controller is certified over the whole set ``{B1 D + B2 : |D| <= 1}``
through the modified Riccati equation

    A' P + P A + P ((1/tau) B1 B1' - (1/(1+tau)) B2 B2') P + Q = 0,

whose trace is a convex function of the scaling parameter ``tau > 0``.
``synthesize_gcc`` minimizes that trace with a bracketing + golden-section
line search in log tau, treating infeasible tau as infinite.  ``encode_cell``
maps an axis-aligned sigma-cell of a DDF family into the (B1, B2) model;
the spectral-norm scaling of B1 is deliberately conservative (the matrix
ball is a strict superset of the diagonal segment we actually need).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .care import eval_cost, solve_care_maximal
from .ddf import DdfProblem, assemble_b, check_sigma
from .errors import (
    CareNoSolutionError,
    CertificationFailureError,
    GccInfeasibleError,
    NumericalFailureError,
)

__all__ = [
    "CellEncoding",
    "GccSolution",
    "encode_cell",
    "solve_gcc_riccati",
    "synthesize_gcc",
    "verify_cell_guarantee",
]

_TAU_FLOOR = 1e-12
_TAU_CAP = 1e12
_LOG2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class CellEncoding:
    """Norm-ball uncertainty model: inputs range over b1 @ Delta + b2."""

    b1: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True, eq=False)
class GccSolution:
    """Certified controller: k achieves cost <= bound on the whole ball."""

    p: np.ndarray
    tau: float
    k: np.ndarray
    bound: float


def encode_cell(problem: DdfProblem, sigma_lo, sigma_hi) -> CellEncoding:
    """Wrap a sigma-cell into the affine norm-ball uncertainty model.

    Midpoint: ``b2 = U diag(mid) V'``.  Radius: ``b1 = |V|_2 U diag(rad)``,
    so every ``U diag(sigma) V'`` with sigma in the cell equals
    ``b1 Delta + b2`` for some ``|Delta|_2 <= 1``.
    """
    sigma_lo = check_sigma(problem, sigma_lo)
    sigma_hi = check_sigma(problem, sigma_hi)
    if np.any(sigma_lo > sigma_hi):
        raise ValueError("cell must satisfy sigma_lo <= sigma_hi componentwise")
    mid = 0.5 * (sigma_lo + sigma_hi)
    rad = 0.5 * (sigma_hi - sigma_lo)
    v_norm = np.linalg.norm(problem.v, 2)
    b2 = (problem.u * mid) @ problem.v.T
    b1 = v_norm * (problem.u * rad)
    return CellEncoding(b1=b1, b2=b2)


def solve_gcc_riccati(a, b1, b2, q, tau: float) -> np.ndarray:
    """Solve the guaranteed-cost Riccati equation for one fixed tau.

    Delegates to the maximal-solution CARE kernel with the sign-indefinite
    quadratic term ``D = (1/(1+tau)) B2 B2' - (1/tau) B1 B1'``.  Raises
    CareNoSolutionError when this tau is infeasible.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b1 = np.atleast_2d(np.asarray(b1, dtype=float))
    b2 = np.atleast_2d(np.asarray(b2, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    q_eigs = np.linalg.eigvalsh(0.5 * (q + q.T))
    if q_eigs[0] <= 0:
        raise ValueError("state cost q must be positive definite")
    d = b2 @ b2.T / (1.0 + tau) - b1 @ b1.T / tau
    return solve_care_maximal(a, 0.5 * (d + d.T), q)


def _gcc_gain(b2: np.ndarray, p: np.ndarray, tau: float) -> np.ndarray:
    return -(b2.T @ p) / (1.0 + tau)


def synthesize_gcc(
    a,
    b1,
    b2,
    q,
    tau0: float = 0.1,
    rel_width: float = 1e-4,
) -> GccSolution:
    """Minimize the certified bound ``trace(P)`` over the scaling tau.

    The search brackets the minimum by walking log-spaced steps out from a
    feasible seed (found by doubling/halving from ``tau0``), then runs
    golden-section in log tau down to relative bracket width ``rel_width``.
    Infeasible tau evaluates to +inf; if no feasible tau exists at all the
    synthesis raises GccInfeasibleError.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b1 = np.atleast_2d(np.asarray(b1, dtype=float))
    b2 = np.atleast_2d(np.asarray(b2, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))

    cache: dict[float, tuple[float, np.ndarray | None]] = {}

    def evaluate(t: float) -> float:
        tau = math.exp(t)
        if tau in cache:
            return cache[tau][0]
        try:
            p = solve_gcc_riccati(a, b1, b2, q, tau)
            value = float(np.trace(p))
        except (CareNoSolutionError, NumericalFailureError):
            value, p = math.inf, None
        cache[tau] = (value, p)
        return value

    t_lo_lim = math.log(_TAU_FLOOR)
    t_hi_lim = math.log(_TAU_CAP)

    # Feasible seed: alternate doublings and halvings away from tau0.
    t0 = math.log(tau0)
    t_seed = None
    for j in range(0, 50):
        for t in ([t0] if j == 0 else [t0 + j * _LOG2, t0 - j * _LOG2]):
            if t_lo_lim <= t <= t_hi_lim and math.isfinite(evaluate(t)):
                t_seed = t
                break
        if t_seed is not None:
            break
    if t_seed is None:
        raise GccInfeasibleError(
            "no feasible tau in the searched range; the uncertainty set admits "
            "no guaranteed-cost controller"
        )

    # Walk downhill in log tau until the value turns back up (or a domain
    # limit pins the minimum at the boundary).
    t_mid = t_seed
    f_mid = evaluate(t_mid)
    direction = 0.0
    for step in (-_LOG2, _LOG2):
        t_try = t_mid + step
        if t_lo_lim <= t_try <= t_hi_lim and evaluate(t_try) < f_mid:
            direction = step
            break
    if direction == 0.0:
        bracket = (t_mid - _LOG2, t_mid, t_mid + _LOG2)
    else:
        bracket = None
        prev, cur = t_mid, t_mid + direction
        while True:
            nxt = cur + direction
            if nxt < t_lo_lim or nxt > t_hi_lim:
                # Monotone run into the boundary: minimum sits there.
                bracket = (min(prev, cur), cur, max(prev, cur))
                break
            if evaluate(nxt) >= evaluate(cur):
                lo, hi = sorted((prev, nxt))
                bracket = (lo, cur, hi)
                break
            prev, cur = cur, nxt

    lo, _, hi = bracket
    lo = max(lo, t_lo_lim)
    hi = min(hi, t_hi_lim)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    e = lo + invphi * (hi - lo)
    fc, fe = evaluate(c), evaluate(e)
    while hi - lo > rel_width:
        if fc <= fe:
            hi, e, fe = e, c, fc
            c = hi - invphi * (hi - lo)
            fc = evaluate(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + invphi * (hi - lo)
            fe = evaluate(e)

    tau_best, (bound, p_best) = min(
        cache.items(), key=lambda item: (item[1][0], item[0])
    )
    if p_best is None or not math.isfinite(bound):
        raise GccInfeasibleError("tau line search ended with no feasible point")
    return GccSolution(
        p=p_best,
        tau=tau_best,
        k=_gcc_gain(b2, p_best, tau_best),
        bound=bound,
    )


def verify_cell_guarantee(
    problem: DdfProblem,
    sigma_lo,
    sigma_hi,
    solution: GccSolution,
    samples: int = 500,
    rng: np.random.Generator | None = None,
) -> float:
    """Sample the certified cell and return the worst observed cost.

    Evaluates the minimal corner (the certified worst case by the ARE
    comparison ordering) plus ``samples`` uniform draws.  A sampled cost
    above ``bound * (1 + 1e-6)`` means the certificate is wrong and raises
    CertificationFailureError.
    """
    sigma_lo = check_sigma(problem, sigma_lo)
    sigma_hi = check_sigma(problem, sigma_hi)
    rng = rng or np.random.default_rng(0)
    points = [sigma_lo]
    if samples > 0:
        draws = rng.uniform(size=(samples, problem.d))
        points.extend(sigma_lo + draws * (sigma_hi - sigma_lo))
    worst = -math.inf
    for sigma in points:
        cost = eval_cost(problem.a, assemble_b(problem, sigma), solution.k)
        worst = max(worst, cost)
    if worst > solution.bound * (1.0 + 1e-6):
        raise CertificationFailureError(
            f"sampled cost {worst:.6e} exceeds certified bound {solution.bound:.6e}"
        )
    return worst
