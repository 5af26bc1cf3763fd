"""Strict-reader behavior: well-formed fixtures parse, drift is rejected."""

import math
from pathlib import Path

import numpy as np
import pytest

from suboptcover_plots.schemas import (
    SchemaError,
    fit_loglinear,
    read_corners_csv,
    read_curve_csv,
    read_field2d_csv,
    read_field3d_json,
)

FIXTURES = Path(__file__).parent / "fixtures"


def test_curve_fixture_parses():
    rows = read_curve_csv(FIXTURES / "curve.csv")
    assert [r.theta for r in rows] == [2.0, 10.0, 100.0, 1000.0]
    assert [r.fit_excluded for r in rows] == [True, False, False, False]


def test_corners_fixture_parses():
    rows = read_corners_csv(FIXTURES / "corners.csv")
    assert len(rows) == 4
    assert all(len(r.corner) == 2 for r in rows)
    assert all(r.cert_ratio >= r.probe_ratio > 0 for r in rows)


def test_field2d_fixture_parses():
    field = read_field2d_csv(FIXTURES / "field2d.csv")
    assert field.ratios.shape == (1, 24, 24)
    finite = field.ratios[np.isfinite(field.ratios)]
    assert finite.min() >= 1 - 1e-9
    # the source node itself is optimal
    assert field.ratios[0, 0, 0] == pytest.approx(1.0, abs=1e-6)


def test_field3d_fixture_parses():
    field = read_field3d_json(FIXTURES / "field3d.json")
    assert field.ratios.shape == (1, 7, 7, 7)
    assert field.sources.shape == (1, 3)
    assert np.isfinite(field.ratios).any()


def test_bad_header_rejected(tmp_path):
    bad = tmp_path / "curve.csv"
    bad.write_text("theta,count,pitch,fit_excluded\n2.0,1,1,0\n")
    with pytest.raises(SchemaError):
        read_curve_csv(bad)


def test_bad_row_rejected(tmp_path):
    bad = tmp_path / "curve.csv"
    bad.write_text("theta,controllers,pitch,fit_excluded\n2.0,one,1,0\n")
    with pytest.raises(SchemaError):
        read_curve_csv(bad)


def test_empty_file_rejected(tmp_path):
    bad = tmp_path / "corners.csv"
    bad.write_text("corner,cert_ratio,probe_ratio\n")
    with pytest.raises(SchemaError):
        read_corners_csv(bad)


def test_incomplete_grid_rejected(tmp_path):
    bad = tmp_path / "field.csv"
    bad.write_text(
        "sigma1,sigma2,controller,ratio\n"
        "0.1,0.1,0,1.0\n0.1,1.0,0,2.0\n1.0,0.1,0,2.0\n"
    )
    with pytest.raises(SchemaError):
        read_field2d_csv(bad)


def test_inf_sentinel_round_trip(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text(
        "sigma1,sigma2,controller,ratio\n"
        "0.1,0.1,0,1.0\n0.1,1.0,0,inf\n1.0,0.1,0,2.0\n1.0,1.0,0,1.5\n"
    )
    field = read_field2d_csv(path)
    assert math.isinf(field.ratios[0, 0, 1])


def test_field3d_missing_key_rejected(tmp_path):
    bad = tmp_path / "field.json"
    bad.write_text('{"axes": [], "sources": [], "shape": [1, 2, 2, 2]}')
    with pytest.raises(SchemaError):
        read_field3d_json(bad)


class TestFitExclusion:
    def test_excluded_rows_do_not_move_the_fit(self):
        from suboptcover_plots.schemas import CurveRow

        base = [
            CurveRow(10.0, 10, 10, False),
            CurveRow(100.0, 20, 20, False),
        ]
        with_outlier = base + [CurveRow(2.0, 500, 50, True)]
        assert fit_loglinear(base) == fit_loglinear(with_outlier)

    def test_fit_slope_on_fixture(self):
        rows = read_curve_csv(FIXTURES / "curve.csv")
        intercept, slope = fit_loglinear(rows)
        assert slope > 0

    def test_fit_needs_two_points(self):
        from suboptcover_plots.schemas import CurveRow

        assert fit_loglinear([CurveRow(10.0, 5, 5, False)]) is None
