"""Command-line driver for the covering experiments.

Every run writes its artifacts plus a ``manifest.json`` recording the
resolved configuration, seed, library versions, and wall time; identical
configurations and seeds produce byte-identical outputs (the wall-time
field aside).  Configuration can come from flags or a JSON file via
``--config`` (flags win).  Exit codes: 0 success, 2 usage error, 3
numerical failure (with a machine-readable report on stderr).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .care import eval_cost
from .cover import build_cover, corner_diagnostics, covering_curve
from .ddf import PRESETS, assemble_b, load_problem, with_theta
from .errors import CoverNotFoundError, SuboptCoverError
from .formats import (
    cover_doc,
    scalar_cover_doc,
    write_components_json,
    write_corners_csv,
    write_conservativeness_csv,
    write_curve_csv,
    write_curve_fit_json,
    write_field_csv_2d,
    write_field_json,
    write_json,
)
from .gcc import verify_cell_guarantee
from .neighborhood import components, compute_field
from .scalar import build_scalar_cover, lower_bound_count

JOBS_ENV = "SUBOPTCOVER_JOBS"


def _resolve_jobs(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(JOBS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _make_problem(args):
    if getattr(args, "problem", None):
        problem = load_problem(args.problem)
        return with_theta(problem, args.theta) if args.theta else problem
    preset = getattr(args, "preset", None)
    if not preset:
        raise ValueError("either --preset or --problem is required")
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    kwargs = {}
    if getattr(args, "d", None):
        kwargs["d"] = args.d
    if getattr(args, "a", None):
        kwargs["a"] = args.a
    if getattr(args, "g", None):
        kwargs["g"] = args.g
    return PRESETS[preset](args.theta, **kwargs)


def _parse_list(value, kind=float):
    if isinstance(value, (list, tuple)):
        return [kind(v) for v in value]
    return [kind(v) for v in str(value).split(",") if v != ""]


def _parse_sources(spec, problem):
    if spec is None or str(spec).startswith("grid:"):
        pitch = 3 if spec is None else int(str(spec).split(":", 1)[1])
        axis = np.geomspace(1.0 / problem.theta, 1.0, pitch)
        return [np.array(pt) for pt in itertools.product(axis, repeat=problem.d)]
    if spec == "min":
        return [problem.sigma_min()]
    points = []
    for chunk in str(spec).split(";"):
        values = _parse_list(chunk)
        points.append(np.array(values))
    return points


def _write_manifest(out: Path, command: str, args, outputs, started: float) -> None:
    # the output path is invocation plumbing, not experiment configuration;
    # leaving it out keeps manifests byte-identical across output locations
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "config", "out") and not callable(v)
    }
    write_json(
        out / "manifest.json",
        {
            "command": command,
            "config": config,
            "seed": getattr(args, "seed", 0),
            "versions": {
                "suboptcover": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "outputs": sorted(outputs),
            "wall_time_s": time.perf_counter() - started,
        },
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_scalar_cover(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    hypothesis = (2.0 * args.a + 1.0) / (2.0 * args.a)
    if args.alpha < hypothesis and args.alpha < 1.5:
        print(
            f"warning: alpha={args.alpha} is below both theory hypotheses "
            f"(>= {hypothesis:.4f} for the construction, >= 1.5 for the lower "
            f"bound); proceeding without guarantees",
            file=sys.stderr,
        )
    cover = build_scalar_cover(args.a, args.alpha, args.theta)
    doc = scalar_cover_doc(cover, args.grid_points)
    if args.alpha >= 1.5:
        doc["lower_bound_count"] = lower_bound_count(args.theta, args.alpha, args.a)
    write_json(out / "scalar_cover.json", doc)
    _write_manifest(out, "scalar-cover", args, ["scalar_cover.json"], started)
    return 0


def cmd_cover(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    problem = _make_problem(args)
    jobs = _resolve_jobs(args.jobs)
    result = build_cover(problem, args.alpha, max_pitch=args.max_pitch, jobs=jobs)
    worst = {}
    if args.samples > 0:
        rng = np.random.default_rng(args.seed)
        for report in result.cells:
            worst[report.cell.index] = verify_cell_guarantee(
                problem,
                report.cell.sigma_lo,
                report.cell.sigma_hi,
                report.solution,
                samples=args.samples,
                rng=rng,
            )
    write_json(out / "cover.json", cover_doc(result, worst))
    _write_manifest(out, "cover", args, ["cover.json"], started)
    return 0


def cmd_curve(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    thetas = _parse_list(args.theta_list)
    problem = _make_problem(
        argparse.Namespace(
            problem=getattr(args, "problem", None),
            preset=args.preset,
            theta=thetas[0],
            d=getattr(args, "d", None),
            a=getattr(args, "a", None),
            g=getattr(args, "g", None),
        )
    )
    curve = covering_curve(
        problem,
        args.alpha,
        thetas,
        max_pitch=args.max_pitch,
        fit_floor=args.fit_floor,
        jobs=_resolve_jobs(args.jobs),
    )
    write_curve_csv(out / "curve.csv", curve)
    write_curve_fit_json(out / "curve_fit.json", curve)
    _write_manifest(out, "curve", args, ["curve.csv", "curve_fit.json"], started)
    return 0


def cmd_corners(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    problem = _make_problem(args)
    reports = corner_diagnostics(
        problem, args.alpha, args.theta, args.pitch, jobs=_resolve_jobs(args.jobs)
    )
    write_corners_csv(out / "corners.csv", reports)
    _write_manifest(out, "corners", args, ["corners.csv"], started)
    return 0


def cmd_neighborhoods(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    problem = _make_problem(args)
    alphas = _parse_list(args.alphas)
    sources = _parse_sources(args.sources, problem)
    field = compute_field(
        problem, sources, args.resolution, jobs=_resolve_jobs(args.jobs)
    )
    outputs = []
    if problem.d == 2:
        write_field_csv_2d(out / "field.csv", field)
        outputs.append("field.csv")
    else:
        write_field_json(out / "field.json", field)
        outputs.append("field.json")
    counts = {}
    for c in range(len(field.gains)):
        for alpha in alphas:
            counts[(c, alpha)] = components(field, c, alpha)[0]
    write_components_json(out / "components.json", field, alphas, counts)
    outputs.append("components.json")
    _write_manifest(out, "neighborhoods", args, outputs, started)
    return 0


def cmd_conservativeness(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    problem = _make_problem(args)
    result = build_cover(
        problem, args.alpha, max_pitch=args.max_pitch, jobs=_resolve_jobs(args.jobs)
    )
    rows = []
    for report in result.cells:
        worst = eval_cost(
            problem.a,
            assemble_b(problem, report.cell.sigma_lo),
            report.solution.k,
        )
        gap = report.solution.bound / worst if math.isfinite(worst) else math.nan
        rows.append((report.cell.index, report.solution.bound, worst, gap))
    write_conservativeness_csv(out / "conservativeness.csv", rows)
    _write_manifest(out, "conservativeness", args, ["conservativeness.csv"], started)
    return 0


def _add_problem_flags(parser, theta_required=True):
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named problem family")
    parser.add_argument("--problem", help="path to a problem JSON document")
    parser.add_argument("--d", type=int, help="dimension for the coupling presets")
    parser.add_argument("--a", type=float, help="scalar dynamics for the scalar preset")
    parser.add_argument("--g", type=float, help="gravity constant for the quadrotor preset")
    parser.add_argument("--theta", type=float, required=theta_required, help="task-space breadth")


def _add_common_flags(parser):
    parser.add_argument("--out", default="suboptcover_out", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed for sampling")
    parser.add_argument("--jobs", type=int, default=None,
                        help=f"worker processes (default: ${JOBS_ENV} or CPU count)")
    parser.add_argument("--config", help="JSON file of flag defaults (flags override)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suboptcover",
        description="Construct and verify suboptimal covers for multi-task LQR families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scalar-cover", help="logarithmic cover of the scalar family")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=10000)
    _add_common_flags(p)
    p.set_defaults(func=cmd_scalar_cover)

    p = sub.add_parser("cover", help="certified grid cover of a matrix family")
    _add_problem_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--max-pitch", type=int, default=64)
    p.add_argument("--samples", type=int, default=0,
                   help="per-cell random guarantee checks recorded in the dump")
    _add_common_flags(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("curve", help="covering-number curve over a theta sweep")
    _add_problem_flags(p, theta_required=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta-list", required=True, help="comma-separated ascending thetas")
    p.add_argument("--max-pitch", type=int, default=64)
    p.add_argument("--fit-floor", type=float, default=4.0,
                   help="thetas below this are flagged fit_excluded")
    _add_common_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("corners", help="corner-cell diagnostics of a grid cover")
    _add_problem_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--pitch", type=int, required=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("neighborhoods", help="suboptimality-ratio fields and topology")
    _add_problem_flags(p)
    p.add_argument("--alphas", required=True, help="comma-separated ascending levels")
    p.add_argument("--resolution", type=int, default=None,
                   help="grid nodes per axis (default 100 in 2D, 40 in 3D+)")
    p.add_argument("--sources", default=None,
                   help="'grid:N', 'min', or ';'-separated sigma vectors")
    _add_common_flags(p)
    p.set_defaults(func=cmd_neighborhoods)

    p = sub.add_parser("conservativeness", help="certificate slack per cover cell")
    _add_problem_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--max-pitch", type=int, default=64)
    _add_common_flags(p)
    p.set_defaults(func=cmd_conservativeness)

    return parser


def _apply_config(parser, argv):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        parser.error(f"--config {known.config}: expected a JSON object")
    actions = {
        a.dest
        for sp in parser._subparsers._group_actions[0].choices.values()
        for a in sp._actions
    }
    for key in config:
        if key not in actions:
            parser.error(f"--config {known.config}: unknown option {key!r}")
    for sp in parser._subparsers._group_actions[0].choices.values():
        sp.set_defaults(**{k: v for k, v in config.items()
                           if k in {a.dest for a in sp._actions}})
        # required flags satisfied by the config file
        for action in sp._actions:
            if action.dest in config:
                action.required = False


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        if args.command == "neighborhoods" and args.resolution is None:
            problem = _make_problem(args)
            args.resolution = 100 if problem.d <= 2 else 40
        return args.func(args)
    except CoverNotFoundError as exc:
        report = {
            "error": type(exc).__name__,
            "message": str(exc),
            "attempts": exc.attempts,
            "failing_cells": [
                {"index": list(r.cell.index), "reason": r.reason}
                for r in exc.failing_cells
            ],
        }
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 3
    except SuboptCoverError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 3
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
