"""DDF problem families: construction, presets, serialization, cost facts."""

import json
import math

import numpy as np
import pytest

from suboptcover.ddf import (
    DdfProblem,
    PRESETS,
    assemble_b,
    dump_problem,
    load_problem,
    make_coupling,
    make_quadrotor,
    make_scalar,
    optimal_cost,
    problem_from_dict,
    problem_to_dict,
    with_theta,
)

from conftest import random_ddf


def test_assemble_scalar_identity_factors():
    prob = make_scalar(1.0, 10.0)
    np.testing.assert_allclose(assemble_b(prob, [0.3]), [[0.3]])


def test_assemble_min_coupling_diagonal():
    prob = make_coupling(2, "min", 2.0)
    np.testing.assert_allclose(assemble_b(prob, [1.0, 0.5]), np.diag([1.0, 0.5]))


def test_assemble_out_of_bounds():
    prob = make_scalar(1.0, 10.0)
    with pytest.raises(ValueError):
        assemble_b(prob, [0.05])
    with pytest.raises(ValueError):
        assemble_b(prob, [1.5])


def test_assemble_linear_in_sigma():
    prob = make_coupling(3, "min", 10.0)
    s1 = np.array([0.15, 0.2, 0.3])
    s2 = np.array([0.2, 0.15, 0.1])
    b = assemble_b(prob, s1 + s2)
    np.testing.assert_allclose(b, assemble_b(prob, s1) + assemble_b(prob, s2))


class TestQuadrotor:
    def test_gravity_block_entries(self):
        q = make_quadrotor(9.81, None, theta=10.0)
        assert q.a[0, 3] == 1.0
        assert q.a[3, 7] == 9.81
        assert q.a[4, 6] == -9.81

    def test_dimensions_and_rank(self):
        q = make_quadrotor(theta=10.0)
        assert (q.n, q.m, q.d) == (12, 4, 4)
        assert np.linalg.matrix_rank(q.u) == 4
        assert np.linalg.matrix_rank(q.v) == 4

    def test_thrust_mixes_into_vertical_acceleration(self):
        q = make_quadrotor(theta=10.0)
        b = assemble_b(q, np.ones(4))
        assert b[5, 0] == 1.0
        np.testing.assert_allclose(b[3:5, :], 0.0)

    def test_full_authority_cost_golden(self):
        q = make_quadrotor(theta=10.0)
        np.testing.assert_allclose(optimal_cost(q, np.ones(4)), 38.7402842877666, rtol=1e-8)

    def test_column_scales(self):
        q = make_quadrotor(1.0, [2.0, 1.0, 1.0, 1.0], theta=10.0)
        b = assemble_b(q, np.ones(4))
        assert b[5, 0] == 2.0


class TestCoupling:
    def test_min_is_identity(self):
        prob = make_coupling(2, "min", 100.0)
        np.testing.assert_allclose(prob.a, np.eye(2))

    def test_max_is_averaging(self):
        prob = make_coupling(3, "max", 100.0)
        np.testing.assert_allclose(prob.a, np.full((3, 3), 1.0 / 3.0))

    def test_dimension_collapse_matches_scalar(self):
        one = make_coupling(1, "min", 10.0)
        scalar = make_scalar(1.0, 10.0)
        np.testing.assert_allclose(one.a, scalar.a)
        np.testing.assert_allclose(
            optimal_cost(one, [0.5]), optimal_cost(scalar, [0.5])
        )

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            make_coupling(2, "medium", 10.0)


class TestScalarFamily:
    def test_theta_one_is_singleton(self):
        prob = make_scalar(0.5, 1.0)
        assert prob.sigma_min() == pytest.approx([1.0])

    def test_negative_a_rejected(self):
        with pytest.raises(ValueError):
            make_scalar(-1.0, 10.0)

    def test_theta_below_one_rejected(self):
        with pytest.raises(ValueError):
            make_scalar(1.0, 0.5)


class TestOptimalCost:
    def test_scalar_unit(self):
        prob = make_scalar(1.0, 10.0)
        np.testing.assert_allclose(optimal_cost(prob, [1.0]), 1 + math.sqrt(2), rtol=1e-10)

    def test_scalar_low_authority(self):
        prob = make_scalar(1.0, 10.0)
        expected = (1 + math.sqrt(1.01)) / 0.01
        np.testing.assert_allclose(optimal_cost(prob, [0.1]), expected, rtol=1e-8)

    def test_min_coupling_decouples(self):
        prob = make_coupling(2, "min", 10.0)
        np.testing.assert_allclose(
            optimal_cost(prob, [1.0, 1.0]), 2 * (1 + math.sqrt(2)), rtol=1e-8
        )

    def test_monotone_in_authority_min_coupling(self, rng):
        prob = make_coupling(3, "min", 10.0)
        for _ in range(30):
            lo = rng.uniform(0.1, 1.0, size=3)
            hi = np.minimum(lo * rng.uniform(1.0, 2.0, size=3), 1.0)
            assert optimal_cost(prob, lo) >= optimal_cost(prob, hi) - 1e-9

    def test_lemma4_sandwich(self, rng):
        for _ in range(200):
            a = float(rng.uniform(1e-2, 5.0))
            b = float(rng.uniform(1e-2, 1.0))
            prob = make_scalar(a, 1.0 / b if b < 1 else 1.0)
            j = optimal_cost(prob, [b])
            assert 2 * a / b**2 < j < (2 * a + 1) / b**2


class TestConstructionInvariants:
    def test_rank_deficient_rejected(self):
        u = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            DdfProblem(a=np.eye(3), u=u, v=np.eye(3)[:, :2], theta=2.0)

    def test_d_larger_than_m_rejected(self):
        with pytest.raises(ValueError):
            DdfProblem(a=np.eye(3), u=np.eye(3), v=np.eye(2), theta=2.0)

    def test_random_families_validate(self, rng):
        for _ in range(10):
            prob = random_ddf(rng)
            assert 0 < prob.d <= min(prob.n, prob.m)


def test_json_round_trip(tmp_path):
    prob = make_quadrotor(9.81, [1.0, 2.0, 3.0, 4.0], theta=7.0)
    path = tmp_path / "problem.json"
    dump_problem(prob, path)
    loaded = load_problem(path)
    np.testing.assert_allclose(loaded.a, prob.a)
    np.testing.assert_allclose(loaded.u, prob.u)
    np.testing.assert_allclose(loaded.v, prob.v)
    assert loaded.theta == prob.theta
    assert loaded.name == prob.name
    doc = json.loads(path.read_text())
    assert set(doc) >= {"A", "U", "V", "theta"}


def test_round_trip_through_dict():
    prob = make_coupling(2, "max", 5.0)
    clone = problem_from_dict(problem_to_dict(prob))
    np.testing.assert_allclose(clone.a, prob.a)


def test_with_theta_preserves_matrices():
    prob = make_scalar(2.0, 10.0)
    wider = with_theta(prob, 100.0)
    assert wider.theta == 100.0
    np.testing.assert_allclose(wider.a, prob.a)


def test_presets_construct():
    for name, factory in PRESETS.items():
        prob = factory(4.0)
        assert prob.theta == 4.0, name
