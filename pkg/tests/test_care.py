"""Riccati/Lyapunov/LQR kernel against closed forms and scipy."""

import math

import numpy as np
import pytest
import scipy.linalg

from suboptcover.care import (
    eval_cost,
    is_hurwitz,
    lqr_synthesize,
    solve_care_maximal,
    solve_lyapunov,
)
from suboptcover.errors import (
    CareNoSolutionError,
    UncontrollablePairError,
    UnstableClosedLoopError,
)

from conftest import random_stabilizable


def scalar_jstar(a, b):
    return (a + math.hypot(a, b)) / b**2


class TestIsHurwitz:
    def test_scalar_negative(self):
        assert is_hurwitz([[-1.0]], tol=1e-9)

    def test_nilpotent(self):
        assert not is_hurwitz([[0.0, 1.0], [0.0, 0.0]])

    def test_closed_loop_scalar(self):
        # a + b k with the optimal gain -(a + sqrt(a^2+b^2))/b
        assert is_hurwitz([[1.0 + 1.0 * -2.414213]])

    def test_margin(self):
        assert not is_hurwitz([[-1e-12]], tol=1e-9)


class TestSolveLyapunov:
    def test_scalar_hand_value(self):
        w = solve_lyapunov([[-1.414213]], [[1.0]])
        np.testing.assert_allclose(w, [[1.0 / (2 * 1.414213)]], rtol=1e-12)

    def test_decoupled_identity(self):
        w = solve_lyapunov(-np.eye(2), np.eye(2))
        np.testing.assert_allclose(w, 0.5 * np.eye(2), rtol=1e-12)

    def test_unstable_rejected(self):
        with pytest.raises(UnstableClosedLoopError):
            solve_lyapunov([[0.5]], [[1.0]])

    def test_methods_agree(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 7))
            a = rng.normal(size=(n, n))
            a -= (np.abs(a).sum(axis=1).max() + 0.1) * np.eye(n)
            c = rng.normal(size=(n, n))
            rhs = c @ c.T
            w1 = solve_lyapunov(a, rhs, method="kron")
            w2 = solve_lyapunov(a, rhs, method="bartels-stewart")
            np.testing.assert_allclose(w1, w2, rtol=1e-8, atol=1e-10)

    def test_residual_and_psd(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 7))
            a = rng.normal(size=(n, n))
            a -= (np.abs(a).sum(axis=1).max() + 0.1) * np.eye(n)
            c = rng.normal(size=(n, n))
            rhs = c @ c.T
            w = solve_lyapunov(a, rhs)
            res = a.T @ w + w @ a + rhs
            assert np.linalg.norm(res) <= 1e-8 * (1 + np.linalg.norm(w))
            assert np.linalg.eigvalsh(w)[0] >= -1e-10


class TestSolveCareMaximal:
    def test_scalar_closed_form(self):
        p = solve_care_maximal([[1.0]], [[1.0]], [[1.0]])
        np.testing.assert_allclose(p, [[1.0 + math.sqrt(2.0)]], rtol=1e-10)

    def test_lyapunov_degenerate(self):
        p = solve_care_maximal([[-1.0]], [[0.0]], [[1.0]])
        np.testing.assert_allclose(p, [[0.5]], rtol=1e-12)

    def test_destabilizing_quadratic_term(self):
        # stabilizing solution exists but is negative definite -> no solution
        with pytest.raises(CareNoSolutionError):
            solve_care_maximal(2 * np.eye(2), -np.eye(2), np.eye(2))

    def test_nonsymmetric_rejected(self):
        with pytest.raises(ValueError):
            solve_care_maximal(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))

    def test_residual_and_stabilizing(self, rng):
        for _ in range(100):
            a, b = random_stabilizable(rng)
            n = a.shape[0]
            d = b @ b.T
            p = solve_care_maximal(a, d, np.eye(n))
            res = a.T @ p + p @ a - p @ d @ p + np.eye(n)
            assert np.linalg.norm(res) <= 1e-6 * (1 + np.linalg.norm(p) ** 2)
            assert is_hurwitz(a - d @ p, tol=0.0)
            assert np.linalg.eigvalsh(p)[0] >= -1e-8

    def test_matches_scipy(self, rng):
        for _ in range(50):
            a, b = random_stabilizable(rng)
            n = a.shape[0]
            p = solve_care_maximal(a, b @ b.T, np.eye(n))
            p_ref = scipy.linalg.solve_continuous_are(a, b, np.eye(n), np.eye(b.shape[1]))
            np.testing.assert_allclose(p, p_ref, rtol=1e-7, atol=1e-9)


class TestLqrSynthesize:
    def test_scalar_unit(self):
        sol = lqr_synthesize([[1.0]], [[1.0]])
        np.testing.assert_allclose(sol.p, [[2.414213562373095]], rtol=1e-10)
        np.testing.assert_allclose(sol.k, [[-2.414213562373095]], rtol=1e-10)

    def test_scalar_half_authority(self):
        sol = lqr_synthesize([[1.0]], [[0.5]])
        np.testing.assert_allclose(sol.cost, scalar_jstar(1.0, 0.5), rtol=1e-10)
        np.testing.assert_allclose(sol.k, [[-scalar_jstar(1.0, 0.5) * 0.5]], rtol=1e-10)

    def test_stable_autonomous(self):
        sol = lqr_synthesize(-np.eye(2), np.zeros((2, 1)))
        np.testing.assert_allclose(sol.p, 0.5 * np.eye(2), rtol=1e-12)
        np.testing.assert_allclose(sol.k, np.zeros((1, 2)), atol=1e-12)

    def test_uncontrollable(self):
        with pytest.raises(UncontrollablePairError):
            lqr_synthesize([[1.0]], [[0.0]])

    def test_scalar_closed_form_sweep(self, rng):
        for _ in range(300):
            a = float(rng.uniform(1e-3, 5.0))
            b = float(rng.uniform(1e-3, 1.0))
            sol = lqr_synthesize([[a]], [[b]])
            j = scalar_jstar(a, b)
            assert abs(sol.cost - j) <= 1e-8 * (1 + j)


class TestEvalCost:
    def test_optimal_gain_matches_trace(self):
        sol = lqr_synthesize([[1.0]], [[1.0]])
        cost = eval_cost([[1.0]], [[1.0]], sol.k)
        np.testing.assert_allclose(cost, sol.cost, rtol=1e-10)

    def test_unstable_is_infinite(self):
        assert eval_cost([[1.0]], [[1.0]], [[-0.5]]) == math.inf

    def test_hand_value(self):
        np.testing.assert_allclose(eval_cost([[1.0]], [[1.0]], [[-3.0]]), 2.5, rtol=1e-12)

    def test_identity_random_systems(self, rng):
        for _ in range(60):
            a, b = random_stabilizable(rng)
            sol = lqr_synthesize(a, b)
            cost = eval_cost(a, b, sol.k)
            assert abs(cost - sol.cost) <= 1e-6 * sol.cost

    def test_suboptimal_gain_costs_more(self, rng):
        for _ in range(20):
            a, b = random_stabilizable(rng)
            sol = lqr_synthesize(a, b)
            k = sol.k * 1.3
            cost = eval_cost(a, b, k)
            assert cost >= sol.cost * (1 - 1e-9)


class TestComparisonOrdering:
    def test_dominated_pairs(self, rng):
        # X dominates X - eps*PSD => maximal solutions ordered the same way
        done = 0
        while done < 60:
            a, b = random_stabilizable(rng, n_max=5)
            n = a.shape[0]
            q = np.eye(n)
            e = rng.normal(size=(2 * n, 2 * n))
            e = e @ e.T
            e11 = e[:n, :n]
            eps = 0.5 / max(np.linalg.eigvalsh(e11)[-1], 1e-6)
            q_t = q - eps * e11
            a_t = a - eps * e[n:, :n]
            d_t = b @ b.T + eps * e[n:, n:]
            try:
                p = solve_care_maximal(a, b @ b.T, q)
                p_t = solve_care_maximal(a_t, d_t, q_t)
            except CareNoSolutionError:
                continue
            assert np.linalg.eigvalsh(p - p_t)[0] >= -1e-8
            done += 1
