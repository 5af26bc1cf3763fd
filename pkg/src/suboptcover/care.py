"""Continuous-time Riccati/Lyapunov/LQR solver kernel.

Everything in this package funnels through four dense solves:

* ``is_hurwitz``       -- stability predicate on closed-loop matrices,
* ``solve_lyapunov``   -- A_cl' W + W A_cl + RHS = 0,
* ``solve_care_maximal`` -- A' P + P A - P D P + Q = 0 with *sign-indefinite* D,
* ``lqr_synthesize`` / ``eval_cost`` -- the standard Q = R = I regulator.

The Riccati solver extracts the stable invariant subspace of the associated
Hamiltonian via an ordered real Schur form, then tightens the result with a
few Newton-Kleinman sweeps.  The indefinite-D case is required by the
guaranteed-cost equation, which rules out methods that assume D = B R^-1 B'.

All returned symmetric matrices are explicitly symmetrized; instability is
reported as ``math.inf`` cost, never as an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    CareNoSolutionError,
    NumericalFailureError,
    UncontrollablePairError,
    UnstableClosedLoopError,
)

__all__ = [
    "CareSolution",
    "is_hurwitz",
    "solve_lyapunov",
    "solve_care_maximal",
    "lqr_synthesize",
    "eval_cost",
]

#: |Re lambda| below this on the Hamiltonian spectrum means the ARE has no
#: stabilizing solution (boundary cases are treated as infeasible).
HAMILTONIAN_AXIS_TOL = 1e-8

_SYM_TOL = 1e-10
_PSD_TOL = 1e-8
_LYAP_RESIDUAL_TOL = 1e-8
_CARE_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CareSolution:
    """Maximal-solution LQR result: value matrix, gain, and optimal cost.

    ``cost`` equals ``trace(p)``, the expected cost under unit-Gaussian
    initial states, and ``k`` is the optimal feedback ``u = k x``.
    """

    p: np.ndarray
    k: np.ndarray
    cost: float


def _as_matrix(m, name: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} must have finite entries")
    return m


def _as_square(m, name: str) -> np.ndarray:
    m = _as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def _require_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    skew = np.max(np.abs(m - m.T)) if m.size else 0.0
    scale = 1.0 + (np.max(np.abs(m)) if m.size else 0.0)
    if skew > _SYM_TOL * scale:
        raise ValueError(f"{name} must be symmetric (max skew {skew:.3e})")
    return symmetrize(m)


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Project onto the symmetric part; stops round-off drift after solves."""
    return 0.5 * (m + m.T)


def is_hurwitz(m, tol: float = 1e-9) -> bool:
    """True iff every eigenvalue of ``m`` has real part below ``-tol``."""
    m = _as_square(m, "m")
    try:
        eigs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK hiccup
        raise NumericalFailureError("eigensolver failed") from exc
    return bool(np.max(eigs.real) < -tol)


def _lyapunov_kron(a_cl: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # Vectorized (column-major) form of A' W + W A = -RHS.
    n = a_cl.shape[0]
    eye = np.eye(n)
    coeff = np.kron(eye, a_cl.T) + np.kron(a_cl.T, eye)
    try:
        w = scipy.linalg.solve(coeff, -rhs.reshape(-1, order="F"))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailureError("singular Lyapunov system") from exc
    return symmetrize(w.reshape((n, n), order="F"))


def solve_lyapunov(a_cl, rhs, method: str = "kron") -> np.ndarray:
    """Solve ``a_cl' W + W a_cl + rhs = 0`` for the PSD matrix W.

    ``a_cl`` must be Hurwitz and ``rhs`` symmetric PSD, which together
    guarantee a unique PSD solution.  ``method`` is ``"kron"`` (direct
    n^2 x n^2 solve, the default at this matrix scale) or
    ``"bartels-stewart"`` (scipy's Schur-based solver).
    """
    a_cl = _as_square(a_cl, "a_cl")
    rhs = _require_symmetric(_as_square(rhs, "rhs"), "rhs")
    if not is_hurwitz(a_cl, tol=0.0):
        raise UnstableClosedLoopError("a_cl is not Hurwitz")
    eigs = np.linalg.eigvalsh(rhs)
    if eigs.size and eigs[0] < -_PSD_TOL * (1.0 + eigs[-1]):
        raise ValueError("rhs must be positive semidefinite")

    if method == "kron":
        w = _lyapunov_kron(a_cl, rhs)
    elif method == "bartels-stewart":
        w = symmetrize(scipy.linalg.solve_continuous_lyapunov(a_cl.T, -rhs))
    else:
        raise ValueError(f"unknown method {method!r}")

    residual = a_cl.T @ w + w @ a_cl + rhs
    if np.linalg.norm(residual) > _LYAP_RESIDUAL_TOL * (1.0 + np.linalg.norm(w)):
        raise NumericalFailureError(
            f"Lyapunov residual {np.linalg.norm(residual):.3e} out of tolerance"
        )
    return w


def _care_residual(a, d, q, p) -> np.ndarray:
    return a.T @ p + p @ a - p @ d @ p + q


def _newton_refine(a, d, q, p, max_iter: int = 4) -> np.ndarray:
    # Newton-Kleinman: each sweep solves a Lyapunov equation at the current
    # closed loop; keeps the last iterate that reduced the residual.
    best = p
    best_res = np.linalg.norm(_care_residual(a, d, q, p))
    for _ in range(max_iter):
        a_cl = a - d @ best
        if not is_hurwitz(a_cl, tol=0.0):
            break
        try:
            candidate = _lyapunov_kron(a_cl, q + best @ d @ best)
        except NumericalFailureError:
            break
        res = np.linalg.norm(_care_residual(a, d, q, candidate))
        if res >= best_res:
            break
        best, best_res = candidate, res
    return best


def solve_care_maximal(a, d, q, axis_tol: float = HAMILTONIAN_AXIS_TOL) -> np.ndarray:
    """Maximal PSD solution of ``a' P + P a - P d P + q = 0``.

    ``d`` and ``q`` must be symmetric; ``d`` may be indefinite (the
    guaranteed-cost equation needs this).  Returns the stabilizing solution
    P, for which ``a - d P`` is Hurwitz; for PSD ``d`` this is the usual
    maximal solution.

    Raises CareNoSolutionError when the Hamiltonian has eigenvalues within
    ``axis_tol`` of the imaginary axis, when its stable subspace is not a
    graph over the state space, or when the stabilizing solution is not PSD
    (all three signal infeasibility of the underlying control problem).
    """
    a = _as_square(a, "a")
    d = _require_symmetric(_as_square(d, "d"), "d")
    q = _require_symmetric(_as_square(q, "q"), "q")
    n = a.shape[0]
    if d.shape != (n, n) or q.shape != (n, n):
        raise ValueError("a, d, q must share the same dimension")

    hamiltonian = np.block([[a, -d], [-q, -a.T]])
    try:
        eigs = np.linalg.eigvals(hamiltonian)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError("eigensolver failed on Hamiltonian") from exc
    if np.min(np.abs(eigs.real)) < axis_tol:
        raise CareNoSolutionError(
            "Hamiltonian eigenvalues on the imaginary axis; no stabilizing solution"
        )

    try:
        _, z, sdim = scipy.linalg.schur(hamiltonian, output="real", sort="lhp")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailureError("Schur decomposition failed") from exc
    if sdim != n:
        raise CareNoSolutionError(
            f"stable Hamiltonian subspace has dimension {sdim}, expected {n}"
        )

    x1 = z[:n, :n]
    x2 = z[n:, :n]
    if np.linalg.cond(x1) > 1e13:
        raise CareNoSolutionError("stable subspace is not a graph; no solution")
    p = symmetrize(np.linalg.solve(x1.T, x2.T).T)
    p = _newton_refine(a, d, q, p)

    res_norm = np.linalg.norm(_care_residual(a, d, q, p))
    p_norm = np.linalg.norm(p)
    if res_norm > _CARE_RESIDUAL_TOL * (1.0 + p_norm**2):
        raise NumericalFailureError(
            f"Riccati residual {res_norm:.3e} out of tolerance for |P|={p_norm:.3e}"
        )
    if not is_hurwitz(a - d @ p, tol=0.0):
        raise CareNoSolutionError("extracted solution is not stabilizing")
    p_eigs = np.linalg.eigvalsh(p)
    if p_eigs[0] < -_PSD_TOL * (1.0 + abs(p_eigs[-1])):
        raise CareNoSolutionError(
            f"stabilizing solution is not PSD (min eigenvalue {p_eigs[0]:.3e})"
        )
    return p


def lqr_synthesize(a, b) -> CareSolution:
    """Standard LQR with Q = R = I: maximal ARE solution, gain, and cost.

    The gain is ``k = -b' P`` and the optimal cost is ``trace(P)``.
    Solver infeasibility is reported as UncontrollablePairError, matching
    the convention that (A, B) is controllable iff some policy has finite
    cost.
    """
    a = _as_square(a, "a")
    b = _as_matrix(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"b must have {a.shape[0]} rows, got {b.shape}")
    try:
        p = solve_care_maximal(a, b @ b.T, np.eye(a.shape[0]))
    except CareNoSolutionError as exc:
        raise UncontrollablePairError(f"(A, B) pair is not controllable: {exc}") from exc
    k = -b.T @ p
    return CareSolution(p=p, k=k, cost=float(np.trace(p)))


def eval_cost(a, b, k) -> float:
    """Cost ``trace((I + k'k) W)`` of the linear policy ``u = k x``.

    W is the closed-loop controllability gramian, i.e. the covariance
    ``int exp(t A_cl) exp(t A_cl') dt`` accumulated from unit-Gaussian
    initial states; it solves ``A_cl W + W A_cl' + I = 0``.  Returns
    ``math.inf`` when ``a + b k`` is not Hurwitz; instability is a valid
    infinite-cost outcome, not an error.
    """
    a = _as_square(a, "a")
    b = _as_matrix(b, "b")
    k = _as_matrix(k, "k")
    a_cl = a + b @ k
    if not is_hurwitz(a_cl, tol=0.0):
        return math.inf
    w = solve_lyapunov(a_cl.T, np.eye(a.shape[0]))
    return float(np.trace((np.eye(a.shape[0]) + k.T @ k) @ w))
