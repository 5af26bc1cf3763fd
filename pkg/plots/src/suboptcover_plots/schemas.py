"""Strict readers for the suboptcover file formats.

Rendering is display-only, so these readers never recompute ratios or
bounds; they validate shape and types aggressively to catch format drift
at the component boundary and hand back plain arrays.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


def _parse_ratio(text: str, where: str) -> float:
    if text == "inf":
        return math.inf
    if text == "nan":
        return math.nan
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaError(f"{where}: bad ratio value {text!r}") from exc


def _require_header(reader, expected, path):
    if reader.fieldnames != expected:
        raise SchemaError(
            f"{path}: expected header {expected}, got {reader.fieldnames}"
        )


@dataclass(frozen=True)
class CurveRow:
    theta: float
    controllers: int
    pitch: int
    fit_excluded: bool


def read_curve_csv(path) -> list[CurveRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, ["theta", "controllers", "pitch", "fit_excluded"], path)
        rows = []
        for i, rec in enumerate(reader):
            try:
                row = CurveRow(
                    theta=float(rec["theta"]),
                    controllers=int(rec["controllers"]),
                    pitch=int(rec["pitch"]),
                    fit_excluded=bool(int(rec["fit_excluded"])),
                )
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad row {i + 2}: {rec}") from exc
            if row.theta < 1 or row.controllers < 1 or row.pitch < 1:
                raise SchemaError(f"{path}: out-of-range row {i + 2}: {rec}")
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


@dataclass(frozen=True)
class CornerRow:
    corner: tuple[int, ...]
    cert_ratio: float
    probe_ratio: float


def read_corners_csv(path) -> list[CornerRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, ["corner", "cert_ratio", "probe_ratio"], path)
        rows = []
        for i, rec in enumerate(reader):
            try:
                corner = tuple(int(part) for part in rec["corner"].split("-"))
            except (AttributeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad corner label in row {i + 2}") from exc
            rows.append(
                CornerRow(
                    corner=corner,
                    cert_ratio=_parse_ratio(rec["cert_ratio"], path),
                    probe_ratio=_parse_ratio(rec["probe_ratio"], path),
                )
            )
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    dims = {len(r.corner) for r in rows}
    if len(dims) != 1:
        raise SchemaError(f"{path}: inconsistent corner dimensions {dims}")
    return rows


@dataclass(frozen=True)
class Field2d:
    sigma1: np.ndarray  # sorted axis values
    sigma2: np.ndarray
    ratios: np.ndarray  # (controllers, len(sigma1), len(sigma2))


def read_field2d_csv(path) -> Field2d:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, ["sigma1", "sigma2", "controller", "ratio"], path)
        records = []
        for i, rec in enumerate(reader):
            try:
                records.append(
                    (
                        float(rec["sigma1"]),
                        float(rec["sigma2"]),
                        int(rec["controller"]),
                        _parse_ratio(rec["ratio"], path),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad row {i + 2}: {rec}") from exc
    if not records:
        raise SchemaError(f"{path}: no data rows")
    sigma1 = np.array(sorted({r[0] for r in records}))
    sigma2 = np.array(sorted({r[1] for r in records}))
    controllers = sorted({r[2] for r in records})
    if controllers != list(range(len(controllers))):
        raise SchemaError(f"{path}: controller indices must be 0..n-1")
    expected = len(sigma1) * len(sigma2) * len(controllers)
    if len(records) != expected:
        raise SchemaError(
            f"{path}: {len(records)} rows do not fill a "
            f"{len(controllers)}x{len(sigma1)}x{len(sigma2)} grid"
        )
    i1 = {v: i for i, v in enumerate(sigma1)}
    i2 = {v: i for i, v in enumerate(sigma2)}
    ratios = np.full((len(controllers), len(sigma1), len(sigma2)), np.nan)
    for s1, s2, c, ratio in records:
        ratios[c, i1[s1], i2[s2]] = ratio
    return Field2d(sigma1=sigma1, sigma2=sigma2, ratios=ratios)


@dataclass(frozen=True)
class Field3d:
    axes: tuple[np.ndarray, np.ndarray, np.ndarray]
    sources: np.ndarray
    ratios: np.ndarray  # (controllers, R, R, R)


def read_field3d_json(path) -> Field3d:
    with open(path) as fh:
        doc = json.load(fh)
    required = {"axes", "sources", "shape", "ratios"}
    missing = required - set(doc)
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    shape = tuple(int(s) for s in doc["shape"])
    if len(shape) != 4:
        raise SchemaError(f"{path}: expected 4-d shape (controllers + 3 axes), got {shape}")
    axes = tuple(np.asarray(a, dtype=float) for a in doc["axes"])
    if len(axes) != 3 or any(a.shape != (shape[i + 1],) for i, a in enumerate(axes)):
        raise SchemaError(f"{path}: axes do not match shape {shape}")
    flat = [math.inf if r is None else float(r) for r in doc["ratios"]]
    if len(flat) != int(np.prod(shape)):
        raise SchemaError(
            f"{path}: {len(flat)} ratios do not fill shape {shape}"
        )
    return Field3d(
        axes=axes,
        sources=np.asarray(doc["sources"], dtype=float),
        ratios=np.asarray(flat).reshape(shape),
    )


def fit_loglinear(rows: list[CurveRow]) -> tuple[float, float] | None:
    """Least-squares count ~ intercept + slope*log(theta), excluded rows skipped."""
    used = [(math.log(r.theta), r.controllers) for r in rows if not r.fit_excluded]
    if len(used) < 2:
        return None
    xs = np.array([u[0] for u in used])
    ys = np.array([u[1] for u in used], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(intercept), float(slope)
