"""Figure rendering for the covering experiments.

Display-only: every number plotted comes straight from the input files.
Rendering is deterministic for fixed inputs (Agg backend, fixed figure
geometry, no timestamps in the output).
"""

from __future__ import annotations

import itertools

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import (
    Field2d,
    Field3d,
    fit_loglinear,
    read_corners_csv,
    read_curve_csv,
    read_field2d_csv,
    read_field3d_json,
)

_DPI = 150
_REGION_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple",
                  "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan")


def _save(fig, out_path):
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)


def render_curve(in_path, out_path) -> None:
    """Controller count vs breadth with a log-linear fit overlay.

    Rows flagged ``fit_excluded`` appear as grey points and do not enter
    the fit.
    """
    rows = read_curve_csv(in_path)
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    used = [r for r in rows if not r.fit_excluded]
    skipped = [r for r in rows if r.fit_excluded]
    if used:
        ax.plot(
            [r.theta for r in used], [r.controllers for r in used],
            "o", color="tab:blue", label="counted",
        )
    if skipped:
        ax.plot(
            [r.theta for r in skipped], [r.controllers for r in skipped],
            "o", color="grey", label="excluded from fit",
        )
    fit = fit_loglinear(rows)
    if fit is not None:
        intercept, slope = fit
        thetas = np.geomspace(min(r.theta for r in rows), max(r.theta for r in rows), 200)
        ax.plot(thetas, intercept + slope * np.log(thetas), "-", color="black",
                label=f"{intercept:.1f} + {slope:.1f} log(theta)")
    ax.set_xscale("log")
    ax.set_xlabel("breadth theta")
    ax.set_ylabel("controllers")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, out_path)


def render_corners(in_path, out_path) -> None:
    """Per-corner certification ratios with the sampled estimates overlaid."""
    rows = read_corners_csv(in_path)
    order = sorted(range(len(rows)), key=lambda i: (sum(rows[i].corner), rows[i].corner))
    labels = ["-".join(str(v) for v in rows[i].corner) for i in order]
    cert = [rows[i].cert_ratio for i in order]
    probe = [rows[i].probe_ratio for i in order]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(rows)), 3.0))
    xs = np.arange(len(rows))
    ax.bar(xs, cert, color="tab:blue", alpha=0.7, label="certified ratio")
    ax.plot(xs, probe, "k.", label="sampled estimate")
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("suboptimality ratio")
    ax.axhline(1.0, color="grey", lw=0.5)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, out_path)


def render_field2d(in_path, out_path, alphas) -> None:
    """Semi-transparent sublevel regions of each controller, log-log axes."""
    field = read_field2d_csv(in_path)
    fig, ax = plt.subplots(figsize=(4.0, 4.0))
    n_ctrl = field.ratios.shape[0]
    for c in range(n_ctrl):
        color = _REGION_COLORS[c % len(_REGION_COLORS)]
        with np.errstate(invalid="ignore"):
            finite = np.where(np.isfinite(field.ratios[c]), field.ratios[c], np.inf)
        for alpha in alphas:
            mask = (finite <= alpha).astype(float)
            if not mask.any():
                continue
            ax.contourf(
                field.sigma1, field.sigma2, mask.T,
                levels=[0.5, 1.5], colors=[color], alpha=0.35 / max(1, len(alphas)),
            )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sigma 1")
    ax.set_ylabel("sigma 2")
    ax.set_title(f"alpha levels: {', '.join(str(a) for a in alphas)}", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def render_field3d(in_path, out_path, alphas) -> None:
    """Voxel views of the sublevel set of controller 0, one panel per alpha."""
    field = read_field3d_json(in_path)
    ratios = field.ratios[0]
    n = len(alphas)
    fig = plt.figure(figsize=(3.0 * max(n, 1), 3.2))
    for i, alpha in enumerate(alphas):
        ax = fig.add_subplot(1, max(n, 1), i + 1, projection="3d")
        with np.errstate(invalid="ignore"):
            mask = np.isfinite(ratios) & (ratios <= alpha)
        if mask.any():
            ax.voxels(mask, facecolor="tab:blue", edgecolor="none", alpha=0.6)
        ax.set_title(f"alpha = {alpha}", fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_zticks([])
    fig.tight_layout()
    _save(fig, out_path)


RENDERERS = {
    "curve": render_curve,
    "corners": render_corners,
    "field2d": render_field2d,
    "field3d": render_field3d,
}


def render(kind, in_path, out_path, alphas=()) -> None:
    """Dispatch one figure; ``alphas`` is used by the field kinds only."""
    if kind not in RENDERERS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {sorted(RENDERERS)}")
    if kind in ("field2d", "field3d"):
        RENDERERS[kind](in_path, out_path, list(alphas))
    else:
        RENDERERS[kind](in_path, out_path)
