"""Closed-form scalar LQR machinery and logarithmic cover bounds.

For the scalar family (dynamics ``a > 0``, authority ``b in [1/theta, 1]``,
unit costs) everything is explicit:

    J*(b) = (a + sqrt(a^2 + b^2)) / b^2,     k*(b) = -(a + sqrt(a^2 + b^2)) / b,
    J_b(k) = (1 + k^2) / (-2 (a + b k))      (finite iff a + b k < 0).

On top of these we build the constructive cover whose size grows like
log(theta) -- geometric intervals, one guaranteed-cost gain per interval,
rescaled analytically from a single base synthesis -- and the matching
lower bound obtained from an interval overestimate of each gain's
suboptimal neighborhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CertificationFailureError,
    CoverConstructionError,
    SuboptCoverError,
)
from .gcc import GccSolution, synthesize_gcc

__all__ = [
    "scalar_optimal",
    "scalar_cost",
    "scalar_cost_ratio",
    "stationary_b",
    "unbounded_ratio_limit",
    "neighborhood_interval",
    "OverestimateConstants",
    "overestimate_constants",
    "overestimate_interval",
    "ScalarCover",
    "build_scalar_cover",
    "lower_bound_count",
]


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def scalar_optimal(a: float, b: float) -> tuple[float, float]:
    """Optimal cost and gain of the scalar LQR problem, in closed form."""
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    root = a + math.hypot(a, b)
    return root / b**2, -root / b


def scalar_cost(a: float, b: float, k: float) -> float:
    """Cost of the fixed gain k; infinite iff the loop a + b k is unstable."""
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    closed = a + b * k
    if closed >= 0:
        return math.inf
    return (1.0 + k * k) / (-2.0 * closed)


def scalar_cost_ratio(a: float, b: float, k: float) -> tuple[float, float]:
    """(cost, cost / optimal cost) for gain k on task b."""
    cost = scalar_cost(a, b, k)
    j_star, _ = scalar_optimal(a, b)
    return cost, cost / j_star


def stationary_b(a: float, k: float) -> float:
    """The unique task b at which gain k is exactly optimal (needs k < -1)."""
    a = _check_positive(a, "a")
    if k >= -1.0:
        raise ValueError(f"need k < -1 for a positive stationary task, got {k}")
    return 2.0 * a * k / (1.0 - k * k)


def unbounded_ratio_limit(k: float) -> float:
    """Limit of the suboptimality ratio of gain k as b grows without bound."""
    if k >= 0:
        raise ValueError(f"need k < 0, got {k}")
    return -(1.0 + k * k) / (2.0 * k)


def _bisect_ratio_boundary(
    a: float, k: float, alpha: float, lo: float, hi: float, increasing: bool
) -> float:
    # Root of r(b, k) = alpha on [lo, hi]; `increasing` states whether r
    # crosses alpha from below as b grows on this side of the minimum.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        _, ratio = scalar_cost_ratio(a, mid, k)
        above = ratio > alpha
        if above == increasing:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-10:
            break
    return 0.5 * (lo + hi)


def neighborhood_interval(
    a: float, theta: float, k: float, alpha: float
) -> tuple[float, float] | None:
    """Tasks in [1/theta, 1] on which gain k stays within ratio alpha.

    The ratio is quasiconvex in b with its minimum (ratio 1) at the
    stationary task, so the sublevel set is a closed interval; its
    endpoints are found by bisection to 1e-10.  When the b -> infinity
    ratio limit does not exceed alpha the upper endpoint is unbounded
    before intersection.  Returns None when the intersection is empty.
    """
    a = _check_positive(a, "a")
    if theta < 1.0:
        raise ValueError(f"theta must be >= 1, got {theta}")
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if k >= -1.0:
        raise ValueError(f"need k < -1, got {k}")

    b_min = stationary_b(a, k)
    pole = -a / k  # ratio diverges as b falls to the instability boundary
    b1 = _bisect_ratio_boundary(a, k, alpha, pole, b_min, increasing=False)

    if unbounded_ratio_limit(k) <= alpha:
        b2 = math.inf
    else:
        hi = b_min if b_min > 0 else 1.0
        while scalar_cost_ratio(a, hi, k)[1] <= alpha:
            hi *= 2.0
        b2 = _bisect_ratio_boundary(a, k, alpha, b_min, hi, increasing=True)

    lo = max(b1, 1.0 / theta)
    hi = min(b2, 1.0)
    if lo > hi:
        return None
    return lo, hi


@dataclass(frozen=True)
class OverestimateConstants:
    """Constants of the interval overestimate: c1 = 3 alpha a, c2 = a sqrt(9 alpha^2 - 6 alpha)."""

    c1: float
    c2: float


def overestimate_constants(a: float, alpha: float) -> OverestimateConstants:
    a = _check_positive(a, "a")
    if alpha < 1.5:
        raise ValueError(f"overestimate needs alpha >= 3/2, got {alpha}")
    return OverestimateConstants(
        c1=3.0 * alpha * a, c2=a * math.sqrt(9.0 * alpha**2 - 6.0 * alpha)
    )


def overestimate_interval(a: float, alpha: float, k: float) -> tuple[float, float]:
    """Interval (1/|k|) [c1 - c2, c1 + c2] containing the alpha-neighborhood.

    Containment of the true neighborhood is guaranteed for a >= 1 (the
    hypothesis under which the optimistic cost/ratio bounds hold).
    """
    if k >= 0:
        raise ValueError(f"need k < 0, got {k}")
    consts = overestimate_constants(a, alpha)
    scale = 1.0 / abs(k)
    return scale * (consts.c1 - consts.c2), scale * (consts.c1 + consts.c2)


@dataclass(frozen=True)
class ScalarCover:
    """A verified alpha-suboptimal cover of the scalar family.

    Interval n is covered by ``gains[n]`` with certified cost bound
    ``bounds[n]``; all gains are rescalings ``base gain / beta^n`` of one
    guaranteed-cost synthesis on the top cell [beta, 1].
    """

    a: float
    alpha: float
    theta: float
    beta: float
    tau: float
    intervals: tuple[tuple[float, float], ...]
    gains: tuple[float, ...]
    bounds: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.gains)

    def min_ratio_grid(self, n_points: int = 10000) -> tuple[np.ndarray, np.ndarray]:
        """Best (over gains) suboptimality ratio on a geometric task grid."""
        bs = np.geomspace(1.0 / self.theta, 1.0, n_points)
        j_star = (self.a + np.hypot(self.a, bs)) / bs**2
        best = np.full_like(bs, np.inf)
        for k in self.gains:
            closed = self.a + bs * k
            cost = np.where(closed < 0, (1.0 + k * k) / (-2.0 * closed), np.inf)
            best = np.minimum(best, cost / j_star)
        return bs, best

    def max_ratio(self, n_points: int = 10000) -> tuple[float, float]:
        """Worst-covered task: (max over b of min-gain ratio, argmax b)."""
        bs, best = self.min_ratio_grid(n_points)
        idx = int(np.argmax(best))
        return float(best[idx]), float(bs[idx])


def _base_synthesis(a: float, beta: float) -> GccSolution:
    return synthesize_gcc(
        [[a]], [[(1.0 - beta) / 2.0]], [[(1.0 + beta) / 2.0]], [[1.0]]
    )


def build_scalar_cover(
    a: float,
    alpha: float,
    theta: float,
    beta_tol: float = 1e-4,
    verify_points: int = 100,
) -> ScalarCover:
    """Construct the geometric-interval cover with one synthesis per family.

    Bisects for the smallest contraction ratio ``beta`` whose top cell
    [beta, 1] admits a guaranteed-cost bound at most ``alpha * 2a`` (the
    certified-coverage threshold), then tiles [1/theta, 1] with
    ``ceil(log theta / -log beta)`` geometric intervals whose gains and
    bounds follow from exact scale equivariance of the scalar synthesis --
    the rescaled state cost is never solved directly, which avoids
    overflow for deep levels.  Every interval is verified on a geometric
    ratio grid before the cover is returned.

    The construction is guaranteed feasible for ``alpha >= (2a + 1) / 2a``;
    smaller alpha may still succeed but can raise CoverConstructionError.
    """
    a = _check_positive(a, "a")
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if theta < 1.0:
        raise ValueError(f"theta must be >= 1, got {theta}")

    target = alpha * 2.0 * a

    def feasible(beta: float) -> bool:
        try:
            return _base_synthesis(a, beta).bound <= target
        except SuboptCoverError:
            return False

    hi = 1.0 - 1e-9
    if not feasible(hi):
        raise CoverConstructionError(
            f"no feasible contraction ratio: even a degenerate top cell exceeds "
            f"bound {target:.6g} (alpha={alpha} too close to 1 for a={a})"
        )
    lo = 0.5
    while feasible(lo):
        hi = lo
        lo *= 0.5
        if lo < 1e-6:
            break
    while hi - lo > beta_tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    beta = hi

    base = _base_synthesis(a, beta)
    if theta == 1.0:
        count = 1
    else:
        count = max(1, math.ceil(math.log(theta) / -math.log(beta)))
        while beta**count > (1.0 / theta) * (1.0 + 1e-12):
            count += 1

    intervals = []
    gains = []
    bounds = []
    k0 = float(base.k[0, 0])
    p0 = float(base.p[0, 0])
    for n in range(count):
        lo_n = max(beta ** (n + 1), 1.0 / theta)
        hi_n = beta**n
        if n == count - 1:
            lo_n = 1.0 / theta
        intervals.append((lo_n, hi_n))
        gains.append(k0 * beta ** (-n))
        bounds.append(p0 * beta ** (-2 * n))

    cover = ScalarCover(
        a=a,
        alpha=alpha,
        theta=theta,
        beta=beta,
        tau=base.tau,
        intervals=tuple(intervals),
        gains=tuple(gains),
        bounds=tuple(bounds),
    )
    _verify_cover(cover, verify_points)
    return cover


def _verify_cover(cover: ScalarCover, points_per_interval: int) -> None:
    for (lo, hi), k in zip(cover.intervals, cover.gains):
        bs = np.geomspace(lo, hi, points_per_interval)
        for b in bs:
            _, ratio = scalar_cost_ratio(cover.a, float(b), k)
            if not ratio <= cover.alpha + 1e-9:
                raise CertificationFailureError(
                    f"interval [{lo:.6g}, {hi:.6g}] not covered: ratio "
                    f"{ratio:.9f} > alpha {cover.alpha} at b={b:.6g}"
                )


def lower_bound_count(theta: float, alpha: float, a: float = 1.0) -> int:
    """Minimum number of gains any alpha-suboptimal cover needs.

    Consecutive neighborhood overestimates must intersect, which caps the
    geometric growth of gain magnitudes; spanning authorities from 1 down
    to 1/theta then forces at least ``log theta / log((c1+c2)/(c1-c2))``
    gains.  Proven for a = 1; other values reuse the same constants and
    should be read as heuristic.
    """
    if theta < 1.0:
        raise ValueError(f"theta must be >= 1, got {theta}")
    consts = overestimate_constants(a, alpha)
    growth = (consts.c1 + consts.c2) / (consts.c1 - consts.c2)
    return max(1, math.ceil(math.log(theta) / math.log(growth)))
