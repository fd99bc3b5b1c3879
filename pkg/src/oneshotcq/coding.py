"""Random coding with square-root decoding, evaluated exactly.

The conditional operators ``A_x`` are the blocks of an optimal test between
``pi_AB`` and ``pi_A (x) pi_B``. A codebook ``(x_1, ..., x_m)`` is decoded by
``E_i = G^{-1/2} A_{x_i} G^{-1/2}`` with ``G = sum_j A_{x_j}``; whatever ``G``
does not cover goes to a remainder outcome that always counts as an error.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import settings
from .cq_channel import as_distribution, dh_cq, joint_state
from .errors import CapExceededError, DimensionError, ValidationError
from .hypothesis_testing import DEFAULT_TOLERANCES, classical_dh
from .operators import as_hermitian, as_test_operator, eig_hermitian, random_density, random_test

PINV_TOL = 1e-10
ENUMERATION_CAP = 10_000


def default_c_grid():
    return np.logspace(-2.0, 2.0, 16)


@dataclass(frozen=True)
class Codebook:
    entries: tuple

    def __post_init__(self):
        entries = tuple(str(x) for x in self.entries)
        if not entries:
            raise ValidationError("a codebook needs at least one codeword")
        object.__setattr__(self, "entries", entries)

    @property
    def m(self):
        return len(self.entries)


@dataclass(frozen=True)
class DecodingPOVM:
    elements: np.ndarray
    remainder: np.ndarray


@dataclass(frozen=True)
class CodeEvaluation:
    per_word_error: np.ndarray
    avg_error: float
    max_error: float


@dataclass(frozen=True)
class HNCheck:
    c: float
    min_eig_slack: float

    @property
    def passed(self):
        return self.min_eig_slack >= -1e-9


def _check_codebook(ch, cb):
    unknown = set(cb.entries) - set(ch.labels)
    if unknown:
        raise ValidationError(f"codebook uses unknown labels {sorted(unknown)}")


def conditional_operators(ch, tests):
    """``A_x = tr_A((|x><x| (x) I) Q)`` for a block-diagonal ``Q``; that is block ``x`` of ``Q``.

    ``tests`` is a ``(|X|, d, d)`` stack in channel label order or a label mapping.
    """
    if isinstance(tests, dict):
        tests = [tests[x] for x in ch.labels]
    tests = np.asarray(tests, dtype=np.complex128)
    if tests.shape != (ch.size, ch.dim_out, ch.dim_out):
        raise DimensionError(f"expected {ch.size} blocks of size {ch.dim_out}")
    return {x: as_test_operator(q) for x, q in zip(ch.labels, tests)}


def _pinv_sqrt(g, pinv_tol):
    w, v = eig_hermitian(g)
    lam_max = w[0]
    if lam_max <= 0.0:
        raise ValidationError("operator sum vanishes; square-root decoder undefined")
    keep = w > pinv_tol * lam_max
    vk = v[:, keep]
    inv_sqrt = (vk / np.sqrt(w[keep])) @ vk.conj().T
    return inv_sqrt, vk @ vk.conj().T


def square_root_decoder(cb, A, pinv_tol=PINV_TOL):
    """Pretty-good-measurement decoder for codebook ``cb`` with operators ``A[x]``."""
    ops = [np.asarray(A[x], dtype=np.complex128) for x in cb.entries]
    dims = {o.shape for o in ops}
    if len(dims) != 1:
        raise DimensionError("conditional operators must act on one space")
    g = sum(ops)
    inv_sqrt, support = _pinv_sqrt(0.5 * (g + g.conj().T), pinv_tol)
    elements = np.array([inv_sqrt @ a @ inv_sqrt for a in ops])
    elements = 0.5 * (elements + elements.conj().transpose(0, 2, 1))
    remainder = np.eye(g.shape[0]) - support
    return DecodingPOVM(elements, 0.5 * (remainder + remainder.conj().T))


def decoder_or_abort(cb, A, pinv_tol=PINV_TOL):
    """:func:`square_root_decoder`, or the all-abort POVM when every ``A_{x_i}`` vanishes.

    Random codebooks can consist only of inputs the optimal test rejects
    outright; their words are then always decoded in error.
    """
    try:
        return square_root_decoder(cb, A, pinv_tol)
    except ValidationError:
        d = np.asarray(A[cb.entries[0]]).shape[0]
        return DecodingPOVM(np.zeros((cb.m, d, d), dtype=np.complex128), np.eye(d, dtype=np.complex128))


def evaluate_code(ch, cb, povm):
    """Exact ``Pr(error | x_i) = 1 - tr(E_i rho_{x_i})`` under a uniform message prior."""
    _check_codebook(ch, cb)
    if povm.elements.shape[0] != cb.m:
        raise DimensionError(f"POVM has {povm.elements.shape[0]} elements for {cb.m} codewords")
    if povm.elements.shape[1] != ch.dim_out:
        raise DimensionError("POVM and channel output dimensions differ")
    rhos = np.array([ch.output(x) for x in cb.entries])
    success = np.einsum("kij,kji->k", povm.elements, rhos).real
    err = np.clip(1.0 - success, 0.0, None)
    return CodeEvaluation(err, float(err.mean()), float(err.max()))


def block_type_two(js, tests):
    """``tr(Q (pi_A (x) pi_B)) = tr((sum_x p_x A_x) pi_B)``."""
    mix = np.einsum("x,xij->ij", js.probs, tests)
    return float(np.einsum("ij,ji->", mix, js.avg).real)


def block_type_one(js, tests):
    """``1 - tr(Q pi_AB) = 1 - sum_x p_x tr(A_x rho_x)``."""
    return 1.0 - float(np.einsum("x,xij,xji->", js.probs, tests, js.states).real)


def ensemble_bound(type_one, type_two, m, c):
    """Averaged-error bound ``(1+c) alpha + (2 + c + 1/c)(m - 1) beta`` over random codebooks."""
    return (1.0 + c) * type_one + (2.0 + c + 1.0 / c) * (m - 1) * type_two


@dataclass(frozen=True)
class ExperimentRow:
    trial: int
    m: int
    eps_prime: float
    c_star: float
    empirical_error: float
    bound_value: float
    seed: int


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple
    trial_errors: np.ndarray
    mean_error: float
    std_error: float
    c_grid: np.ndarray
    bounds: np.ndarray
    best_c: float
    best_bound: float
    type_two: float

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "m", "eps_prime", "c_star", "empirical_error", "bound_value", "seed"])
        for r in self.rows:
            w.writerow([r.trial, r.m, _fmt(r.eps_prime), _fmt(r.c_star), _fmt(r.empirical_error),
                        _fmt(r.bound_value), r.seed])
        return buf.getvalue()


def _fmt(x):
    return f"{x:.12g}"


def _message_count(rate):
    m = 2.0 ** rate
    mi = int(round(m))
    if abs(m - mi) > 1e-9 * max(1.0, m) or mi < 2:
        raise ValueError(f"2^R must be an integer m >= 2, got R={rate}")
    return mi


def random_coding_experiment(ch, p, rate, eps_prime, trials, seed, c_grid=None, tol=DEFAULT_TOLERANCES):
    """Draw ``trials`` i.i.d. codebooks of size ``2^rate`` from ``p`` and decode them exactly.

    Trial ``k`` uses ``numpy.random.default_rng((seed, k))`` so reports do not
    depend on scheduling. The bound column is the ensemble bound at the ``c``
    from ``c_grid`` minimizing it.
    """
    if not 0.0 < eps_prime < 1.0:
        raise ValueError(f"eps' must lie in (0, 1), got {eps_prime}")
    if trials < 1:
        raise ValueError("need at least one trial")
    m = _message_count(rate)
    p = as_distribution(ch, p)
    js = joint_state(ch, p)
    res = dh_cq(js, eps_prime, tol)
    A = conditional_operators(ch, res.tests)
    beta = block_type_two(js, res.tests)
    c_grid = default_c_grid() if c_grid is None else np.asarray(c_grid, dtype=float)
    # the test's own type-I error is eps' up to solver rounding
    bounds = np.array([ensemble_bound(eps_prime, beta, m, c) for c in c_grid])
    k = int(np.argmin(bounds))

    errors = np.empty(trials)
    rows = []
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        cb = Codebook(tuple(ch.labels[i] for i in rng.choice(ch.size, size=m, p=p)))
        ev = evaluate_code(ch, cb, decoder_or_abort(cb, A))
        errors[trial] = ev.avg_error
        rows.append(ExperimentRow(trial, m, eps_prime, float(c_grid[k]), ev.avg_error, float(bounds[k]), seed))
    std = float(errors.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return ExperimentReport(tuple(rows), errors, float(errors.mean()), std, c_grid, bounds,
                            float(c_grid[k]), float(bounds[k]), beta)


def codebook_error(ch, cb, A):
    return evaluate_code(ch, cb, decoder_or_abort(cb, A)).avg_error


def ensemble_average_error(ch, p, m, eps_prime=None, A=None, tol=DEFAULT_TOLERANCES):
    """Exact expectation of the average error over all ``|X|^m`` codebooks drawn i.i.d. from ``p``.

    The decoder uses ``A`` if given, else the blocks of the optimal test at
    ``eps_prime``.
    """
    p = as_distribution(ch, p)
    if ch.size ** m > ENUMERATION_CAP:
        raise CapExceededError(f"|X|^m = {ch.size}^{m} exceeds the enumeration cap {ENUMERATION_CAP}")
    if A is None:
        if eps_prime is None:
            raise ValueError("pass eps_prime or the conditional operators A")
        A = conditional_operators(ch, dh_cq(joint_state(ch, p), eps_prime, tol).tests)
    live = [i for i in range(ch.size) if p[i] > 0]
    total = 0.0
    for word in itertools.product(live, repeat=m):
        weight = math.prod(p[i] for i in word)
        cb = Codebook(tuple(ch.labels[i] for i in word))
        total += weight * codebook_error(ch, cb, A)
    return total


def check_hayashi_nagaoka(S, T, c):
    """Smallest eigenvalue of ``(1+c)(I-S) + (2+c+1/c) T - (I - (S+T)^{-1/2} S (S+T)^{-1/2})``."""
    if not c > 0.0:
        raise ValueError(f"c must be positive, got {c}")
    S = as_test_operator(S)
    T = as_hermitian(T)
    if eig_hermitian(T)[0][-1] < -1e-9:
        raise ValidationError("T must be positive semidefinite")
    d = S.shape[0]
    if T.shape != S.shape:
        raise DimensionError("S and T must have the same shape")
    eye = np.eye(d)
    g = S + T
    if np.abs(g).max() == 0.0:
        lhs = eye
    else:
        inv_sqrt, _ = _pinv_sqrt(g, PINV_TOL)
        lhs = eye - inv_sqrt @ S @ inv_sqrt
    rhs = (1.0 + c) * (eye - S) + (2.0 + c + 1.0 / c) * T
    diff = rhs - lhs
    return HNCheck(float(c), float(eig_hermitian(0.5 * (diff + diff.conj().T))[0][-1]))


def expurgate_to_max_error(ch, cb, povm, allow_odd=False):
    """Keep the better half of the codewords, so that the max error is at most twice the average.

    Ties are broken by codeword index. Dropped POVM elements join the remainder.
    """
    if cb.m % 2 and not allow_odd:
        raise ValueError("expurgation needs an even codebook size; pass allow_odd to keep floor(m/2)")
    if cb.m < 2:
        raise ValueError("expurgation needs at least two codewords")
    ev = evaluate_code(ch, cb, povm)
    order = np.argsort(ev.per_word_error, kind="stable")
    keep = np.sort(order[: cb.m // 2])
    drop = np.setdiff1d(np.arange(cb.m), keep)
    new_cb = Codebook(tuple(cb.entries[i] for i in keep))
    new_povm = DecodingPOVM(povm.elements[keep], povm.remainder + povm.elements[drop].sum(axis=0))
    return new_cb, new_povm, evaluate_code(ch, new_cb, new_povm)


def confusion_matrix(ch, cb, povm):
    """Joint law ``P(M = i, M' = j) = tr(E_j rho_{x_i}) / m``; column 0 is the abort outcome."""
    _check_codebook(ch, cb)
    rhos = np.array([ch.output(x) for x in cb.entries])
    ops = np.concatenate([povm.remainder[None], povm.elements])
    joint = np.einsum("jab,iba->ij", ops, rhos).real / cb.m
    return np.clip(joint, 0.0, None)


def empirical_distribution(ch, cb):
    counts = np.array([cb.entries.count(x) for x in ch.labels], dtype=float)
    return counts / cb.m


def classical_dpi_check(ch, cb, povm, eps, tol=DEFAULT_TOLERANCES):
    """Both sides of the data-processing step behind the converse.

    Returns ``(classical, quantum)``: ``D_H^eps`` of the message/decision joint
    law against the product of its marginals, and ``D_H^eps`` of the cq state
    for the empirical codeword distribution. Processing never increases it, so
    ``classical <= quantum``.
    """
    joint = confusion_matrix(ch, cb, povm)
    product = np.outer(joint.sum(axis=1), joint.sum(axis=0))
    classical = classical_dh(joint.ravel(), product.ravel(), eps)
    quantum = dh_cq(joint_state(ch, empirical_distribution(ch, cb)), eps, tol).value
    return classical, quantum


def code_rate(cb):
    return settings.log(cb.m)


def hayashi_nagaoka_suite(count, dims=(2, 16), c_range=(1e-2, 1e2), seed=0):
    """Checks on ``count`` random ``(S, T, c)``: ``0 <= S <= I``, ``T`` PSD of random rank and scale."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(dims[0], dims[1] + 1))
        S = random_test(d, rng)
        T = random_density(d, int(rng.integers(1, d + 1)), rng) * float(np.exp(rng.normal()))
        c = float(np.exp(rng.uniform(math.log(c_range[0]), math.log(c_range[1]))))
        out.append(check_hayashi_nagaoka(S, T, c))
    return out
