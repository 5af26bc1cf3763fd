"""Writers for the CLI's file formats (documented in docs/formats.md).

All writers are deterministic: floats are serialized with ``repr`` (the
shortest round-trip form), JSON keys are sorted, and row order is fixed by
construction.  Infinite ratios use the sentinel ``inf`` in CSV and ``null``
in JSON.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .cover import CellReport, CoverResult, CurveResult
from .neighborhood import NeighborhoodField
from .scalar import ScalarCover

__all__ = [
    "write_json",
    "write_curve_csv",
    "write_curve_fit_json",
    "write_corners_csv",
    "write_field_csv_2d",
    "write_field_json",
    "write_components_json",
    "write_conservativeness_csv",
    "scalar_cover_doc",
    "cover_doc",
]


def _num(x):
    # JSON-safe scalar: inf -> None (documented sentinel).
    x = float(x)
    return None if math.isinf(x) or math.isnan(x) else x


def _csv_num(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scalar_cover_doc(cover: ScalarCover, grid_points: int = 10000) -> dict:
    max_ratio, argmax_b = cover.max_ratio(grid_points)
    return {
        "a": cover.a,
        "alpha": cover.alpha,
        "theta": cover.theta,
        "beta": cover.beta,
        "tau": cover.tau,
        "N": cover.size,
        "intervals": [list(iv) for iv in cover.intervals],
        "gains": list(cover.gains),
        "bounds": list(cover.bounds),
        "verification": {
            "grid_points": grid_points,
            "max_ratio": max_ratio,
            "argmax_b": argmax_b,
        },
    }


def _cell_doc(report: CellReport, worst_sampled: float | None = None) -> dict:
    doc = {
        "index": list(report.cell.index),
        "sigma_lo": report.cell.sigma_lo.tolist(),
        "sigma_hi": report.cell.sigma_hi.tolist(),
        "certified": report.certified,
        "cert_ratio": _num(report.cert_ratio),
        "probe_ratio": _num(report.cell_ratio),
        "reason": report.reason,
    }
    if report.solution is not None:
        doc["bound"] = report.solution.bound
        doc["tau"] = report.solution.tau
        doc["gain"] = report.solution.k.tolist()
    if worst_sampled is not None:
        doc["worst_sampled"] = _num(worst_sampled)
    return doc


def cover_doc(result: CoverResult, worst_sampled: dict | None = None) -> dict:
    worst_sampled = worst_sampled or {}
    return {
        "problem": result.problem_name,
        "theta": result.theta,
        "alpha": result.alpha,
        "pitch": result.pitch,
        "total_controllers": result.total_controllers,
        "attempts": [dict(a) for a in result.attempts],
        "cells": [
            _cell_doc(r, worst_sampled.get(r.cell.index)) for r in result.cells
        ],
    }


def write_curve_csv(path, curve: CurveResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "controllers", "pitch", "fit_excluded"])
        for row in curve.rows:
            writer.writerow(
                [
                    _csv_num(row.theta),
                    row.controllers,
                    row.pitch,
                    int(row.fit_excluded),
                ]
            )


def write_curve_fit_json(path, curve: CurveResult) -> None:
    doc = {"fit_floor": curve.fit_floor, "fit": None}
    if curve.fit is not None:
        doc["fit"] = {"intercept": curve.fit[0], "log_slope": curve.fit[1]}
    write_json(path, doc)


def write_corners_csv(path, reports: list[CellReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["corner", "cert_ratio", "probe_ratio"])
        for r in reports:
            writer.writerow(
                [
                    "-".join(str(i) for i in r.cell.index),
                    _csv_num(r.cert_ratio),
                    _csv_num(r.cell_ratio),
                ]
            )


def write_field_csv_2d(path, field: NeighborhoodField) -> None:
    if field.d != 2:
        raise ValueError(f"CSV field export is 2-dimensional only, got d={field.d}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma1", "sigma2", "controller", "ratio"])
        for c in range(len(field.gains)):
            for i, s1 in enumerate(field.axes[0]):
                for j, s2 in enumerate(field.axes[1]):
                    writer.writerow(
                        [
                            _csv_num(s1),
                            _csv_num(s2),
                            c,
                            _csv_num(field.ratios[c, i, j]),
                        ]
                    )


def write_field_json(path, field: NeighborhoodField) -> None:
    ratios = [
        _num(v) for v in np.asarray(field.ratios, dtype=float).reshape(-1)
    ]
    write_json(
        path,
        {
            "problem": field.problem_name,
            "theta": field.theta,
            "resolution": field.resolution,
            "axes": [axis.tolist() for axis in field.axes],
            "sources": field.sources.tolist(),
            "shape": list(field.ratios.shape),
            "ratios": ratios,
        },
    )


def write_components_json(path, field: NeighborhoodField, alphas, counts) -> None:
    """counts: mapping (controller, alpha) -> component count."""
    write_json(
        path,
        {
            "problem": field.problem_name,
            "theta": field.theta,
            "resolution": field.resolution,
            "connectivity": 1,
            "alphas": list(alphas),
            "counts": [
                {"controller": c, "alpha": a, "count": counts[(c, a)]}
                for c in range(len(field.gains))
                for a in alphas
            ],
        },
    )


def write_conservativeness_csv(path, rows) -> None:
    """rows: iterable of (cell index tuple, bound, worst_actual, gap)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", "bound", "worst_actual", "gap"])
        for index, bound, worst, gap in rows:
            writer.writerow(
                [
                    "-".join(str(i) for i in index),
                    _csv_num(bound),
                    _csv_num(worst),
                    _csv_num(gap),
                ]
            )
