import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneshotcq import _backend, _kernels_py
from oneshotcq.operators import random_density

_kernels = pytest.importorskip("oneshotcq._kernels")

seeds = st.integers(0, 2**32 - 1)


def blocks(k, d, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    rhos = np.array([random_density(d, seed=rng) for _ in range(k)])
    avg = np.einsum("x,xij->ij", p, rhos)
    return p[:, None, None] * rhos, p[:, None, None] * avg[None]


def test_compiled_backend_selected():
    expected = "python" if os.environ.get("ONESHOTCQ_PURE_PYTHON") else "cython"
    assert _backend.BACKEND == expected
    assert _kernels.BACKEND == "cython" and _kernels_py.BACKEND == "python"


@given(st.integers(1, 5), st.integers(1, 6), seeds, st.floats(0.1, 20.0))
def test_spectrum_parity(k, d, seed, t):
    R, S = blocks(k, d, seed)
    w1, a1, b1, V1 = _kernels_py.threshold_spectrum(R, S, t)
    w2, a2, b2, V2 = _kernels.threshold_spectrum(R, S, t)
    assert np.allclose(w1, w2, atol=1e-12)
    # eigenvectors may differ by phases or rotate inside degenerate spaces, Rayleigh values may not
    order1 = np.argsort(w1, axis=1)
    order2 = np.argsort(w2, axis=1)
    assert np.allclose(np.take_along_axis(a1, order1, 1), np.take_along_axis(a2, order2, 1), atol=1e-12)
    assert np.allclose(np.take_along_axis(b1, order1, 1), np.take_along_axis(b2, order2, 1), atol=1e-12)
    for k_ in range(k):
        M = R[k_] - t * S[k_]
        assert np.allclose(M @ V2[k_], V2[k_] * w2[k_], atol=1e-10)


@given(st.integers(1, 5), st.integers(1, 6), seeds, st.floats(0.01, 0.9))
def test_locate_parity(k, d, seed, eps):
    R, S = blocks(k, d, seed)
    t_hi = 4.0 * k * d
    t1 = _kernels_py.locate_threshold(R, S, eps, t_hi)
    t2 = _kernels.locate_threshold(R, S, eps, t_hi)
    assert t1[0] == pytest.approx(t2[0], rel=1e-9)


def test_commuting_degenerate_parity():
    R = np.diag([0.4, 0.4, 0.1, 0.1])[None].astype(complex)
    S = np.diag([0.25, 0.25, 0.25, 0.25])[None].astype(complex)
    t1 = _kernels_py.locate_threshold(R, S, 0.3, 10.0)
    t2 = _kernels.locate_threshold(R, S, 0.3, 10.0)
    assert t1[0] == pytest.approx(1.6) and t2[0] == pytest.approx(1.6)
