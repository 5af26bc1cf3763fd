import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_stabilizable(rng, n_max=6):
    """Random (A, B) pair; generic draws are controllable with prob. 1."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, n + 1))
    a = rng.normal(size=(n, n)) / np.sqrt(n)
    b = rng.normal(size=(n, m))
    return a, b


def random_ddf(rng, d_max=4, extra_max=2, theta_range=(2.0, 10.0)):
    """Random decomposed-dynamics family with full-rank factors."""
    from suboptcover.ddf import DdfProblem

    d = int(rng.integers(1, d_max + 1))
    n = d + int(rng.integers(0, extra_max + 1))
    m = d + int(rng.integers(0, extra_max + 1))
    theta = float(rng.uniform(*theta_range))
    while True:
        a = rng.normal(size=(n, n)) / np.sqrt(n)
        u = rng.normal(size=(n, d))
        v = rng.normal(size=(m, d))
        su = np.linalg.svd(u, compute_uv=False)
        sv = np.linalg.svd(v, compute_uv=False)
        if su[-1] > 1e-3 * su[0] and sv[-1] > 1e-3 * sv[0]:
            try:
                return DdfProblem(a=a, u=u, v=v, theta=theta, name="random")
            except Exception:
                continue
