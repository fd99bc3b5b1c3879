import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneshotcq.asymptotics import (
    capacity_csv,
    capacity_rows,
    iid_expansion,
    product_channel,
    stein_csv,
    stein_table,
    tensor_power,
)
from oneshotcq.cq_channel import CQChannel, InputSearchConfig, dh_cq, joint_state
from oneshotcq.errors import CapExceededError
from oneshotcq.hypothesis_testing import classical_dh, dh, optimal_test
from oneshotcq.operators import random_density

from conftest import DATA, pure

seeds = st.integers(0, 2**32 - 1)
NOISELESS = CQChannel.from_states([np.diag([1, 0]), np.diag([0, 1])])
ZERO_PLUS = CQChannel.from_states([pure(1, 0), pure(1, 1)])
PLUS = pure(1, 1)
TWO_THIRDS = np.diag([2 / 3, 1 / 3])
FAST = InputSearchConfig(step=0.1, refine_iters=20)


@pytest.fixture(scope="module")
def regression():
    return json.loads((DATA / "regression.json").read_text())


def test_tensor_power_basics():
    rho = random_density(3, seed=1)
    assert np.array_equal(tensor_power(rho, 1), rho)
    psi = tensor_power(PLUS, 4)
    assert np.linalg.matrix_rank(psi, tol=1e-10) == 1
    assert np.trace(psi).real == pytest.approx(1, abs=1e-8)
    with pytest.raises(CapExceededError):
        tensor_power(np.eye(2) / 2, 13)


@given(st.integers(1, 4), seeds)
def test_tensor_square_spectrum(d, seed):
    rho = random_density(d, seed=seed)
    w = np.linalg.eigvalsh(rho)
    assert np.allclose(np.sort(np.outer(w, w).ravel()), np.linalg.eigvalsh(tensor_power(rho, 2)), atol=1e-12)


def test_stein_equal_states():
    rho = random_density(2, seed=3)
    rows = stein_table(rho, rho, 0.1, 4)
    for r in rows:
        assert r.dh_rate == pytest.approx(-math.log2(0.9) / r.n, abs=1e-9)
        assert r.rel_ent == pytest.approx(0, abs=1e-10)
    assert len({r.rel_ent for r in rows}) == 1


def test_stein_commuting_matches_classical():
    p, q = np.array([0.9, 0.1]), np.array([0.5, 0.5])
    rows = stein_table(np.diag(p), np.diag(q), 0.05, 6)
    pn, qn = p, q
    for r in rows:
        assert r.dh_rate == pytest.approx(classical_dh(pn, qn, 0.05) / r.n, abs=1e-8)
        pn, qn = np.kron(pn, p), np.kron(qn, q)


def test_stein_rate_above_product_test():
    rows = stein_table(PLUS, TWO_THIRDS, 0.05, 4)
    d0 = dh(PLUS, TWO_THIRDS, 0.0)
    for r in rows:
        assert r.dh_rate >= d0 / r.n - 1e-9
        eps1 = 1 - 0.95 ** (1 / r.n)
        q1 = optimal_test(PLUS, TWO_THIRDS, eps1)
        assert r.dh_rate >= -math.log2(q1.beta) - 1e-9


def test_stein_regression(regression):
    for name, (rho, sigma) in {"noncommuting": (PLUS, TWO_THIRDS),
                               "commuting": (np.diag([0.9, 0.1]), np.diag([0.5, 0.5]))}.items():
        fx = regression["stein"][name]
        rows = stein_table(rho, sigma, fx["eps"], 5)
        for r, ref in zip(rows, fx["rows"]):
            assert ref["gap"] <= 1e-7
            assert r.dh_rate == pytest.approx(ref["dh_rate"], abs=1e-9)


def test_stein_noncommuting_trend(regression):
    rows = regression["stein"]["noncommuting"]["rows"]
    d = regression["stein"]["noncommuting"]["rel_ent"]
    gaps = [abs(r["dh_rate"] - d) for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_stein_csv_format():
    text = stein_csv(stein_table(PLUS, PLUS, 0.5, 2))
    assert text.splitlines()[0] == "n,dh_rate,rel_ent,gap"
    assert text.splitlines()[1].startswith("1,1,0,1")


def test_product_channel():
    assert product_channel(NOISELESS, 1) is NOISELESS
    ch2 = product_channel(NOISELESS, 2)
    assert ch2.labels == ("0,0", "0,1", "1,0", "1,1")
    overlaps = np.einsum("xij,yji->xy", ch2.outputs, ch2.outputs).real
    assert np.allclose(overlaps, np.eye(4))
    assert dh_cq(joint_state(ch2, np.full(4, 0.25)), 0.0).value == pytest.approx(2.0, abs=1e-10)


def test_iid_expansion_order():
    p = np.array([0.3, 0.7])
    assert np.allclose(iid_expansion(2, 2)(p), [0.09, 0.21, 0.21, 0.49])


def test_capacity_noiseless_zero_error():
    rows = capacity_rows(NOISELESS, 0.0, 3, search=FAST)
    assert all(r.rate_upper == pytest.approx(1.0, abs=1e-9) for r in rows)
    assert all(r.holevo == pytest.approx(1.0) for r in rows)


def test_capacity_identical_outputs():
    same = CQChannel.from_states([np.diag([0.6, 0.4])] * 2)
    rows = capacity_rows(same, 0.1, 3, search=FAST)
    for r in rows:
        assert r.rate_upper == pytest.approx(-math.log2(0.9) / r.n, abs=1e-9)
        assert r.rate_lower == 0.0 and r.holevo == pytest.approx(0, abs=1e-10)


def test_capacity_full_mode_sandwich():
    rows = capacity_rows(ZERO_PLUS, 0.1, 2, "full", FAST)
    for r in rows:
        assert r.rate_lower <= r.rate_upper + 1e-6
    wide = CQChannel.from_states([np.eye(2) / 2] * 65)
    with pytest.raises(ValueError):
        capacity_rows(wide, 0.1, 1, "full", FAST)


def test_capacity_regression(regression):
    fx = regression["capacity_zero_plus"]
    rows = capacity_rows(ZERO_PLUS, fx["eps"], 3)
    for r, ref in zip(rows, fx["rows"]):
        assert r.rate_upper == pytest.approx(ref["rate_upper"], abs=1e-9)
        assert r.rate_lower <= r.rate_upper + 1e-6


def test_capacity_trend_shape(regression):
    rows = regression["capacity_zero_plus"]["rows"]
    gaps = [abs(r["rate_upper"] - r["holevo"]) for r in rows]
    assert gaps[-1] < gaps[0]
    # the per-letter converse crosses below the Holevo quantity at finite n,
    # so the distance is not monotone in n
    assert rows[2]["rate_upper"] < rows[2]["holevo"] < rows[1]["rate_upper"]


def test_capacity_csv_labels_iid_as_best_found():
    rows = capacity_rows(NOISELESS, 0.0, 1, search=FAST)
    assert capacity_csv(rows, "iid").splitlines()[0] == "n,eps,rate_upper_iid_best_found,rate_lower,holevo_at_best_input"
