import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneshotcq import settings
from oneshotcq.errors import CapExceededError, DimensionError, ValidationError
from oneshotcq.operators import (
    KrausChannel,
    apply_channel,
    as_density,
    as_hermitian,
    as_test_operator,
    dephasing_channel,
    eig_hermitian,
    identity_channel,
    kernel_projector,
    partial_trace,
    partial_trace_channel,
    positive_part,
    random_channel,
    random_density,
    random_hermitian,
    random_pure,
    random_test,
    support_projector,
    tensor,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 12)


def test_eig_identity():
    w, v = eig_hermitian(np.eye(2))
    assert np.allclose(w, [1, 1])
    assert np.allclose(v @ v.conj().T, np.eye(2))


def test_eig_diagonal_descending():
    w, v = eig_hermitian(np.diag([-1.0, 3.0]))
    assert np.allclose(w, [3, -1])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])


@given(dims, seeds)
def test_eig_reconstruction(d, seed):
    h = random_hermitian(d, seed)
    w, v = eig_hermitian(h)
    assert np.all(np.diff(w) <= 0)
    scale = max(1.0, np.linalg.norm(h))
    assert np.linalg.norm(h - (v * w) @ v.conj().T) <= 1e-8 * scale
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-8)


def test_hermitian_symmetrizes_and_rejects():
    a = np.array([[1, 1j + 1e-12], [-1j, 2]])
    h = as_hermitian(a)
    assert np.array_equal(h, h.conj().T)
    with pytest.raises(ValidationError):
        as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(DimensionError):
        as_hermitian(np.zeros((2, 3)))


def test_density_clamps_small_negative():
    rho = np.diag([1 + 5e-11, -5e-11])
    out = as_density(rho)
    assert np.linalg.eigvalsh(out).min() >= 0
    with pytest.raises(ValidationError):
        as_density(np.diag([1.1, -0.1]))
    with pytest.raises(ValidationError):
        as_density(np.diag([0.5, 0.4]))


def test_test_operator_range():
    assert np.allclose(as_test_operator(np.diag([1 + 1e-10, -1e-10])), np.diag([1, 0]))
    with pytest.raises(ValidationError):
        as_test_operator(np.diag([1.01, 0]))


def test_tensor_indexing():
    a = np.arange(4).reshape(2, 2) + 0j
    b = np.arange(9).reshape(3, 3) + 0j
    t = tensor(a, b)
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert t[i * 3 + k, j * 3 + l] == a[i, j] * b[k, l]


def test_tensor_cap():
    with pytest.raises(CapExceededError):
        tensor(np.eye(64), np.eye(65))
    old = settings.dim_cap()
    try:
        settings.set_dim_cap(4)
        with pytest.raises(CapExceededError):
            tensor(np.eye(2), np.eye(3))
    finally:
        settings.set_dim_cap(old)


def test_partial_trace_product():
    a = random_density(2, seed=1)
    b = random_density(3, seed=2)
    ab = tensor(a, b)
    assert np.allclose(partial_trace(ab, (2, 3), "A"), a)
    assert np.allclose(partial_trace(ab, (2, 3), "B"), b)


@given(st.integers(1, 4), st.integers(1, 4), seeds)
def test_partial_trace_matches_loop(da, db, seed):
    m = random_hermitian(da * db, seed)
    ref_a = np.zeros((da, da), complex)
    for k in range(db):
        ref_a += m[k::db, k::db]
    assert np.allclose(partial_trace(m, (da, db), "A"), ref_a)
    assert np.isclose(np.trace(partial_trace(m, (da, db), "B")), np.trace(m))


def test_positive_part_and_projectors():
    h = np.diag([2.0, -1.0, 0.0])
    assert np.allclose(positive_part(h), np.diag([2, 0, 0]))
    rho = np.diag([0.7, 0.3, 0.0])
    assert np.allclose(support_projector(rho), np.diag([1, 1, 0]))
    assert np.allclose(kernel_projector(rho), np.diag([0, 0, 1]))


@given(dims, seeds)
def test_random_density_valid(d, seed):
    rho = random_density(d, seed=seed)
    assert np.isclose(np.trace(rho).real, 1)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    assert np.array_equal(rho, random_density(d, seed=seed))


def test_random_pure_and_rank():
    psi = random_pure(5, seed=3)
    assert np.isclose(np.trace(psi @ psi).real, 1)
    rho = random_density(6, rank=2, seed=4)
    assert np.sum(np.linalg.eigvalsh(rho) > 1e-10) == 2


@given(dims, seeds)
def test_random_test_range(d, seed):
    w = np.linalg.eigvalsh(random_test(d, seed))
    assert w.min() >= 0 and w.max() <= 1


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), seeds)
def test_random_channel_cptp(din, dout, n, seed):
    if n * dout < din:
        with pytest.raises(ValueError):
            random_channel(din, dout, n, seed)
        return
    ch = random_channel(din, dout, n, seed)
    out = ch(random_density(din, seed=seed))
    assert np.isclose(np.trace(out).real, 1)
    assert np.linalg.eigvalsh(out).min() >= -1e-12


def test_kraus_rejects_non_tp():
    with pytest.raises(ValidationError):
        KrausChannel(np.array([np.diag([1.0, 0.5])]))


def test_named_channels():
    rho = random_density(3, seed=9)
    assert np.allclose(identity_channel(3)(rho), rho)
    assert np.allclose(dephasing_channel(3)(rho), np.diag(np.diag(rho)))
    ab = tensor(random_density(2, seed=1), random_density(3, seed=2))
    for keep in "AB":
        ch = partial_trace_channel((2, 3), keep)
        assert np.allclose(apply_channel(ch, ab), partial_trace(ab, (2, 3), keep))
