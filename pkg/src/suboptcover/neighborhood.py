"""Dense suboptimality-ratio fields and their sublevel-set topology.

For a list of fixed controllers (each LQR-optimal at some source task) we
evaluate ``cost / optimal cost`` on a log-spaced grid over the task box.
Thresholding a field at alpha gives an approximate suboptimal neighborhood;
connected-component counts of those masks expose the topology (the
minimum-coupling family produces disconnected neighborhoods at small
alpha).  Connectivity is axis-adjacent by default -- deliberately
conservative, since diagonal adjacency could hide a disconnection.
Component counts are resolution-dependent and must be reported with the
grid resolution.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .care import eval_cost
from .ddf import DdfProblem, assemble_b, check_sigma, optimal_policy
from .errors import SuboptCoverError

__all__ = [
    "NeighborhoodField",
    "compute_field",
    "components",
    "AlphaSweep",
    "alpha_sweep",
]


@dataclass(frozen=True, eq=False)
class NeighborhoodField:
    """Ratio tensor of shape (controllers,) + (resolution,)*d.

    Unstable or failed nodes hold ``inf``.  Every finite entry is >= 1 up
    to round-off, with ratio 1 at each controller's own source.
    """

    problem_name: str
    theta: float
    resolution: int
    axes: tuple[np.ndarray, ...]
    sources: np.ndarray  # (controllers, d)
    gains: tuple[np.ndarray, ...]
    ratios: np.ndarray

    @property
    def d(self) -> int:
        return len(self.axes)

    def node_sigma(self, node: tuple[int, ...]) -> np.ndarray:
        return np.array([self.axes[i][node[i]] for i in range(self.d)])


def _node_ratios(problem: DdfProblem, gains, sigma: np.ndarray) -> list[float]:
    try:
        j_star = optimal_policy(problem, sigma).cost
    except SuboptCoverError:
        return [math.inf] * len(gains)
    b = assemble_b(problem, sigma)
    out = []
    for k in gains:
        try:
            out.append(eval_cost(problem.a, b, k) / j_star)
        except SuboptCoverError:
            out.append(math.inf)
    return out


def _chunk_worker(args):
    problem, gains, sigmas = args
    return [_node_ratios(problem, gains, sigma) for sigma in sigmas]


def compute_field(
    problem: DdfProblem,
    source_sigmas,
    resolution: int,
    jobs: int = 1,
) -> NeighborhoodField:
    """Evaluate every source's LQR-optimal controller over the whole grid.

    Axes are geometric with ``resolution`` points per dimension from
    1/theta to 1.  Solver failure at a node records an infinite ratio and
    the computation continues.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    sources = np.atleast_2d(np.asarray(source_sigmas, dtype=float))
    sources = np.vstack([check_sigma(problem, s) for s in sources])
    gains = tuple(optimal_policy(problem, s).k for s in sources)

    axes = tuple(
        np.geomspace(1.0 / problem.theta, 1.0, resolution) for _ in range(problem.d)
    )
    shape = (resolution,) * problem.d
    nodes = list(np.ndindex(shape))
    sigmas = [np.array([axes[i][n[i]] for i in range(problem.d)]) for n in nodes]

    if jobs <= 1:
        rows = [_node_ratios(problem, gains, s) for s in sigmas]
    else:
        chunk = max(1, len(sigmas) // (8 * jobs))
        tasks = [
            (problem, gains, sigmas[i : i + chunk])
            for i in range(0, len(sigmas), chunk)
        ]
        rows = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_chunk_worker, tasks):
                rows.extend(part)

    ratios = np.empty((len(gains),) + shape)
    for node, row in zip(nodes, rows):
        for c, value in enumerate(row):
            ratios[(c,) + node] = value

    return NeighborhoodField(
        problem_name=problem.name,
        theta=problem.theta,
        resolution=resolution,
        axes=axes,
        sources=sources,
        gains=gains,
        ratios=ratios,
    )


def components(
    field: NeighborhoodField,
    controller: int,
    alpha: float,
    connectivity: int = 1,
) -> tuple[int, np.ndarray]:
    """Connected components of the alpha-sublevel mask of one controller.

    ``connectivity`` is the maximum number of axes a neighbor step may
    cross (1 = faces only).  Returns the component count and an integer
    label tensor (0 = outside the mask).
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    ratios = field.ratios[controller]
    mask = np.isfinite(ratios) & (ratios <= alpha)
    structure = ndimage.generate_binary_structure(field.d, connectivity)
    labels, count = ndimage.label(mask, structure=structure)
    return int(count), labels


@dataclass(frozen=True, eq=False)
class AlphaSweep:
    """Masks and component counts of one controller across alpha levels."""

    field: NeighborhoodField
    controller: int
    alphas: tuple[float, ...]
    counts: tuple[int, ...]
    masks: np.ndarray  # (len(alphas),) + grid shape, boolean, nested in alpha


def alpha_sweep(
    problem: DdfProblem,
    source_sigma,
    alphas,
    resolution: int,
    jobs: int = 1,
    connectivity: int = 1,
) -> AlphaSweep:
    """Component counts of one controller's neighborhoods over alpha levels.

    Alphas must be ascending; the masks are then nested by construction
    (sublevel sets of one fixed ratio field).
    """
    alphas = tuple(float(a) for a in alphas)
    if any(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly ascending")
    field = compute_field(problem, [source_sigma], resolution, jobs=jobs)
    counts = []
    masks = np.zeros((len(alphas),) + field.ratios.shape[1:], dtype=bool)
    for i, alpha in enumerate(alphas):
        count, labels = components(field, 0, alpha, connectivity)
        counts.append(count)
        masks[i] = labels > 0
    return AlphaSweep(
        field=field,
        controller=0,
        alphas=alphas,
        counts=tuple(counts),
        masks=masks,
    )
