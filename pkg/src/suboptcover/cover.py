"""Geometric grid partitions and the empirical covering pipeline.

The task box [1/theta, 1]^d is tiled by ``pitch^d`` cells with geometrically
spaced breakpoints.  Each cell gets one guaranteed-cost controller; a cell
is *certified* when its cost bound is at most alpha times the optimal cost
at the cell's high-authority corner, which is sufficient because the bound
dominates the controller's cost on the whole cell while the optimal cost is
smallest at that corner.  If any cell fails, the pitch is incremented and
the partition rebuilt; the smallest fully certified pitch gives an
empirical upper bound on the covering number.

Per-cell work is pure and independent; ``jobs > 1`` dispatches cells to a
process pool, with results reassembled in cell order for determinism.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .care import eval_cost
from .ddf import DdfProblem, assemble_b, optimal_cost, with_theta
from .errors import (
    CareNoSolutionError,
    CoverNotFoundError,
    GccInfeasibleError,
    NumericalFailureError,
)
from .gcc import GccSolution, encode_cell, synthesize_gcc

__all__ = [
    "GeometricGrid",
    "GridCell",
    "CellReport",
    "CoverResult",
    "CurveRow",
    "CurveResult",
    "partition_grid",
    "certify_cell",
    "build_cover",
    "covering_curve",
    "gcc_conservativeness",
    "corner_diagnostics",
]


@dataclass(frozen=True, eq=False)
class GridCell:
    """One axis-aligned cell; ``index`` is 1-based per dimension."""

    index: tuple[int, ...]
    sigma_lo: np.ndarray
    sigma_hi: np.ndarray


@dataclass(frozen=True, eq=False)
class GeometricGrid:
    """Geometric partition of [1/theta, 1]^d into pitch^d cells."""

    theta: float
    d: int
    pitch: int
    breakpoints: np.ndarray  # length pitch + 1, from 1/theta to 1

    def cell(self, index: tuple[int, ...]) -> GridCell:
        if len(index) != self.d or any(not 1 <= j <= self.pitch for j in index):
            raise ValueError(f"cell index {index} outside [1, {self.pitch}]^{self.d}")
        lo = np.array([self.breakpoints[j - 1] for j in index])
        hi = np.array([self.breakpoints[j] for j in index])
        return GridCell(index=tuple(index), sigma_lo=lo, sigma_hi=hi)

    def cells(self):
        """All cells in lexicographic index order."""
        for index in itertools.product(range(1, self.pitch + 1), repeat=self.d):
            yield self.cell(index)

    def corner_indices(self) -> list[tuple[int, ...]]:
        """The 2^d cells touching the corners of the task box."""
        extremes = (1,) if self.pitch == 1 else (1, self.pitch)
        return [idx for idx in itertools.product(extremes, repeat=self.d)]


def partition_grid(theta: float, d: int, pitch: int) -> GeometricGrid:
    """Breakpoints ``theta^((i-1)/pitch - 1)``; theta = 1 degenerates to one point."""
    if theta < 1.0:
        raise ValueError(f"theta must be >= 1, got {theta}")
    if d < 1 or pitch < 1:
        raise ValueError(f"need d >= 1 and pitch >= 1, got d={d}, pitch={pitch}")
    if theta == 1.0:
        pitch = 1
    breakpoints = np.geomspace(1.0 / theta, 1.0, pitch + 1)
    return GeometricGrid(theta=float(theta), d=d, pitch=pitch, breakpoints=breakpoints)


@dataclass(frozen=True, eq=False)
class CellReport:
    """Certification outcome for one cell.

    ``cert_ratio`` is the certification margin ``bound / J*(sigma_hi)``:
    the worst suboptimality ratio the certificate can guarantee on the
    cell, and the quantity compared against alpha.  ``cell_ratio``
    estimates the controller's *actual* worst ratio from the 2^d corners
    plus the midpoint; it is a sampled lower estimate of the true
    supremum, reported separately from the certificate.
    """

    cell: GridCell
    solution: GccSolution | None
    certified: bool
    cert_ratio: float
    cell_ratio: float
    reason: str | None = None


@dataclass(frozen=True, eq=False)
class CoverResult:
    """A fully certified cover plus the pitch-refinement history."""

    problem_name: str
    theta: float
    alpha: float
    pitch: int
    cells: tuple[CellReport, ...]
    attempts: tuple[dict, ...]

    @property
    def total_controllers(self) -> int:
        return self.pitch ** len(self.cells[0].cell.index)


def _cell_probe_points(cell: GridCell) -> list[np.ndarray]:
    d = len(cell.index)
    corners = [
        np.where(np.array(bits, dtype=bool), cell.sigma_hi, cell.sigma_lo)
        for bits in itertools.product((0, 1), repeat=d)
    ]
    corners.append(0.5 * (cell.sigma_lo + cell.sigma_hi))
    return corners


def _cell_ratio(problem: DdfProblem, cell: GridCell, gain: np.ndarray) -> float:
    worst = 1.0
    for sigma in _cell_probe_points(cell):
        cost = eval_cost(problem.a, assemble_b(problem, sigma), gain)
        worst = max(worst, cost / optimal_cost(problem, sigma))
    return worst


def _synthesize_cell(problem: DdfProblem, cell: GridCell):
    encoding = encode_cell(problem, cell.sigma_lo, cell.sigma_hi)
    return synthesize_gcc(problem.a, encoding.b1, encoding.b2, np.eye(problem.n))


def _certify(problem: DdfProblem, cell: GridCell, alpha: float, diagnostics: bool):
    try:
        solution = _synthesize_cell(problem, cell)
    except (GccInfeasibleError, CareNoSolutionError, NumericalFailureError) as exc:
        return CellReport(cell, None, False, math.nan, math.nan, reason=str(exc))
    cert_ratio = solution.bound / optimal_cost(problem, cell.sigma_hi)
    certified = cert_ratio <= alpha
    ratio = _cell_ratio(problem, cell, solution.k) if diagnostics else math.nan
    return CellReport(cell, solution, certified, cert_ratio, ratio)


def certify_cell(problem: DdfProblem, cell: GridCell, alpha: float) -> CellReport:
    """Synthesize and certify one cell; infeasible synthesis is reported, not raised."""
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    return _certify(problem, cell, alpha, diagnostics=True)


def _certify_star(args):
    return _certify(*args)


def _ratio_star(args):
    problem, report = args
    if report.solution is None:
        return report
    return CellReport(
        report.cell,
        report.solution,
        report.certified,
        report.cert_ratio,
        _cell_ratio(problem, report.cell, report.solution.k),
        report.reason,
    )


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def build_cover(
    problem: DdfProblem,
    alpha: float,
    initial_pitch: int = 1,
    max_pitch: int = 64,
    jobs: int = 1,
) -> CoverResult:
    """Smallest pitch in [initial_pitch, max_pitch] whose cells all certify.

    Pitch increments by one (no bisection) so the result is the smallest
    *tested* pitch.  Raises CoverNotFoundError with the failing cells of
    the last attempt when max_pitch is exhausted.  Cell diagnostics
    (cell_ratio) are computed only for the returned grid.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    attempts: list[dict] = []
    last_failures: list[CellReport] = []
    pitches = [1] if problem.theta == 1.0 else range(initial_pitch, max_pitch + 1)
    for pitch in pitches:
        grid = partition_grid(problem.theta, problem.d, pitch)
        cells = list(grid.cells())
        reports = _map_jobs(
            _certify_star, [(problem, c, alpha, False) for c in cells], jobs
        )
        failures = [r for r in reports if not r.certified]
        attempts.append(
            {"pitch": pitch, "cells": len(cells), "failed": len(failures)}
        )
        if not failures:
            reports = _map_jobs(_ratio_star, [(problem, r) for r in reports], jobs)
            return CoverResult(
                problem_name=problem.name,
                theta=problem.theta,
                alpha=alpha,
                pitch=pitch,
                cells=tuple(reports),
                attempts=tuple(attempts),
            )
        last_failures = failures
    raise CoverNotFoundError(
        f"no certified cover up to pitch {max_pitch} "
        f"({len(last_failures)} failing cells at the last attempt)",
        failing_cells=last_failures,
        attempts=attempts,
    )


@dataclass(frozen=True)
class CurveRow:
    theta: float
    controllers: int
    pitch: int
    fit_excluded: bool


@dataclass(frozen=True)
class CurveResult:
    """Controller counts along a theta sweep, with an optional log fit.

    ``fit`` is (intercept, slope) of the least-squares line
    ``count ~ intercept + slope * log(theta)`` over the non-excluded rows,
    or None when fewer than two rows qualify.
    """

    rows: tuple[CurveRow, ...]
    fit: tuple[float, float] | None
    fit_floor: float


def covering_curve(
    problem: DdfProblem,
    alpha: float,
    theta_list,
    max_pitch: int = 64,
    fit_floor: float = 4.0,
    jobs: int = 1,
) -> CurveResult:
    """One build_cover per theta (ascending); rows below fit_floor are
    flagged so downstream fits skip the pre-asymptotic regime."""
    thetas = [float(t) for t in theta_list]
    if any(t < 1.0 for t in thetas) or any(
        t2 < t1 for t1, t2 in zip(thetas, thetas[1:])
    ):
        raise ValueError("theta_list must be ascending and >= 1")
    rows = []
    for theta in thetas:
        result = build_cover(
            with_theta(problem, theta), alpha, max_pitch=max_pitch, jobs=jobs
        )
        rows.append(
            CurveRow(
                theta=theta,
                controllers=result.total_controllers,
                pitch=result.pitch,
                fit_excluded=theta < fit_floor,
            )
        )
    used = [(math.log(r.theta), r.controllers) for r in rows if not r.fit_excluded]
    fit = None
    if len(used) >= 2:
        xs = np.array([u[0] for u in used])
        ys = np.array([u[1] for u in used], dtype=float)
        slope, intercept = np.polyfit(xs, ys, 1)
        fit = (float(intercept), float(slope))
    return CurveResult(rows=tuple(rows), fit=fit, fit_floor=fit_floor)


@dataclass(frozen=True)
class ConservativenessReport:
    """Certified bound vs the worst cost actually attained on the cell."""

    bound: float
    worst_actual: float
    gap: float


def gcc_conservativeness(problem: DdfProblem, cell: GridCell) -> ConservativenessReport:
    """Measure the slack of the norm-ball certificate on one cell.

    The worst case over the cell occurs at the minimal corner, so the gap
    ``bound / cost(sigma_lo)`` isolates how much the matrix-ball
    over-approximation costs; it is always >= 1 up to round-off.
    """
    solution = _synthesize_cell(problem, cell)
    worst = eval_cost(problem.a, assemble_b(problem, cell.sigma_lo), solution.k)
    return ConservativenessReport(
        bound=solution.bound, worst_actual=worst, gap=solution.bound / worst
    )


def corner_diagnostics(
    problem: DdfProblem, alpha: float, theta: float, pitch: int, jobs: int = 1
) -> list[CellReport]:
    """Certification and probe ratios for the 2^d corner cells only.

    The certification ratio is the figure of merit (close to alpha where
    the grid pitch is binding, smaller where the grid is finer than
    needed); the probe ratio accompanies it as the sampled estimate of
    the controller's actual worst ratio.
    """
    grid = partition_grid(theta, problem.d, pitch)
    prob = with_theta(problem, theta)
    corners = [grid.cell(idx) for idx in grid.corner_indices()]
    return _map_jobs(_certify_star, [(prob, c, alpha, True) for c in corners], jobs)
