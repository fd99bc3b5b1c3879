"""Binary quantum hypothesis testing and the hypothesis-testing relative entropy.

For states ``rho`` (null) and ``sigma`` (alternative) the optimal type-II
error under a type-I budget ``eps`` is

    beta*(eps) = min { tr(Q sigma) : 0 <= Q <= I, tr(Q rho) >= 1 - eps },

and ``D_H^eps(rho || sigma) = -log beta*``. The minimum is attained by a
Neyman-Pearson test ``Q = P_+(t) + lam * P_0(t)`` built from the positive and
null eigenspaces of ``rho - t sigma``. Each solve is certified against the
Lagrange dual

    beta*(eps) >= mu (1 - eps) - tr((mu rho - sigma)_+)    for all mu >= 0,

evaluated at ``mu = 1/t``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import settings
from ._backend import kernels
from .errors import CertificationError, DimensionError
from .operators import as_density, eig_hermitian, projector


@dataclass(frozen=True)
class Tolerances:
    duality_gap_tol: float = 1e-7
    bisection_tol: float = 1e-12
    rank_tol: float = 1e-9

    def __post_init__(self):
        for name in ("duality_gap_tol", "bisection_tol", "rank_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class HypothesisTestResult:
    """Optimal test for one ``(rho, sigma, eps)`` instance.

    ``dual_value`` is ``-log`` of the dual lower bound on ``beta``, hence an
    upper bound on ``dh``; ``gap = dual_value - dh >= 0``.
    """

    beta: float
    dh: float
    test: np.ndarray
    threshold: float
    mixing: float
    dual_value: float
    gap: float
    type_one: float


@dataclass(frozen=True)
class BlockSolution:
    beta: float
    tests: np.ndarray
    threshold: float
    mixing: float
    dual_beta: float
    type_one: float


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    return eps


def _block_eigs(blocks):
    w, v = np.linalg.eigh(blocks)
    return w, v


def _threshold_dual(R, S, t, eps):
    """Dual bound on beta at ``mu = 1/t`` written in the eigenbasis of ``R - t S``.

    ``mu(1-eps) - tr((mu R - S)_+) = sum_i min(a_i / t, b_i) - eps / t`` with
    ``a_i, b_i`` the Rayleigh values of each eigenvector; this form has no
    cancellation between large terms when ``t`` is small.
    """
    _, a, b, _ = kernels.threshold_spectrum(R, S, t)
    return float(np.minimum(a / t, b).sum() - eps / t)


def _infinite_case(R, S, eps, tol):
    """Tests inside ker(S) when they already meet the type-I budget, else None."""
    ws, vs = _block_eigs(S)
    trs = np.einsum("kii->k", S).real
    tests = np.zeros_like(R)
    mass = 0.0
    for k in range(R.shape[0]):
        cut = tol.rank_tol * max(trs[k], 0.0)
        p = projector(vs[k][:, ws[k] <= cut])
        tests[k] = p
        mass += float(np.trace(p @ R[k]).real)
    if mass < 1.0 - eps - tol.bisection_tol:
        return None
    lam = min(1.0, (1.0 - eps) / mass) if mass > 0 else 0.0
    return BlockSolution(
        beta=0.0,
        tests=lam * tests,
        threshold=math.inf,
        mixing=lam,
        dual_beta=0.0,
        type_one=lam * mass,
    )


def _zero_error_case(R, S, tol):
    """eps = 0: the support projector of R is optimal; certify with tiny thresholds."""
    wr, vr = _block_eigs(R)
    trr = np.einsum("kii->k", R).real
    tests = np.zeros_like(R)
    for k in range(R.shape[0]):
        tests[k] = projector(vr[k][:, wr[k] > tol.rank_tol * max(trr[k], 0.0)])
    beta = float(np.einsum("kij,kji->", tests, S).real)
    type_one = float(np.einsum("kij,kji->", tests, R).real)
    dual = max(_threshold_dual(R, S, t, 0.0) for t in (1e-6, 1e-8, 1e-10, 1e-12, 1e-14))
    return BlockSolution(beta, tests, 0.0, 0.0, dual, type_one)


def _assemble(R, S, eps, t):
    """Build the Neyman-Pearson test at threshold ``t`` from pooled eigen-data."""
    _, a, b, V = kernels.threshold_spectrum(R, S, t)
    K, d = a.shape
    a = a.ravel()
    b = b.ravel()
    er = a - t * b
    order = np.argsort(er, kind="stable")
    cum = np.cumsum(a[order])
    over = np.nonzero(cum > eps)[0]
    j = order[over[0]] if over.size else order[-1]

    z = 1e-11 * max(float(np.abs(a).max()), t * float(np.abs(b).max()), 1e-300)
    above = er > er[j] + z
    group = np.abs(er - er[j]) <= z
    a_above = float(a[above].sum())
    a_group = float(a[group].sum())
    lam = (1.0 - eps - a_above) / a_group if a_group > 0 else 0.0
    lam = min(1.0, max(0.0, lam))

    weights = np.where(above, 1.0, np.where(group, lam, 0.0)).reshape(K, d)
    tests = np.einsum("kij,kj,klj->kil", V, weights, V.conj())
    tests = 0.5 * (tests + tests.conj().transpose(0, 2, 1))
    beta = float(b[above].sum() + lam * b[group].sum())
    dual = float(np.minimum(a / t, b).sum() - eps / t)
    return BlockSolution(beta, tests, t, lam, dual, a_above + lam * a_group)


def solve_blocks(R, S, eps, tol=DEFAULT_TOLERANCES):
    """Optimal test for block-diagonal hypotheses ``(+)_k R_k`` vs ``(+)_k S_k``.

    ``R`` and ``S`` are ``(K, d, d)`` stacks, each summing to unit trace.
    A single global threshold is shared by all blocks. Returns a
    :class:`BlockSolution`; certification is left to the caller.
    """
    eps = _check_eps(eps)
    R = np.ascontiguousarray(R, dtype=np.complex128)
    S = np.ascontiguousarray(S, dtype=np.complex128)
    if R.shape != S.shape or R.ndim != 3:
        raise DimensionError(f"block stacks differ in shape: {R.shape} vs {S.shape}")

    # Work where S is diagonal: then <v|S|v> is a sum of nonnegative terms and
    # stays accurate relative to itself even when beta is far below 1e-16.
    ws, U = np.linalg.eigh(S)
    Uh = U.conj().transpose(0, 2, 1)
    Rd = Uh @ R @ U
    Rd = 0.5 * (Rd + Rd.conj().transpose(0, 2, 1))
    Sd = np.zeros_like(S)
    idx = np.arange(S.shape[1])
    Sd[:, idx, idx] = np.maximum(ws, 0.0)
    sol = _solve_diagonal(np.ascontiguousarray(Rd), Sd, eps, tol)
    tests = U @ sol.tests @ Uh
    tests = 0.5 * (tests + tests.conj().transpose(0, 2, 1))
    return BlockSolution(sol.beta, tests, sol.threshold, sol.mixing, sol.dual_beta, sol.type_one)


def _solve_diagonal(R, S, eps, tol):
    inf_sol = _infinite_case(R, S, eps, tol)
    if inf_sol is not None:
        return inf_sol
    if eps == 0.0:
        return _zero_error_case(R, S, tol)

    wr = np.linalg.eigvalsh(R)
    ws = np.linalg.eigvalsh(S)
    trs = np.einsum("kii->k", S).real
    nonzero = ws[ws > tol.rank_tol * np.maximum(trs, 0.0)[:, None]]
    t_hi = float(wr.max()) / float(nonzero.min()) + 1.0
    t, _, _, _ = kernels.locate_threshold(R, S, eps, t_hi)
    return _assemble(R, S, eps, t)


def certify(beta, dual_beta, tol, what="hypothesis test"):
    """Return ``(dh, dual_value, gap)`` in the configured log units or raise."""
    dh = settings.neg_log(beta)
    if beta == 0.0:
        return math.inf, math.inf, 0.0
    if dual_beta <= 0.0:
        dual_value = math.inf
    else:
        dual_value = settings.neg_log(dual_beta)
    gap = dual_value - dh
    if not gap <= tol.duality_gap_tol:
        raise CertificationError(
            f"{what}: duality gap {gap:.3e} exceeds {tol.duality_gap_tol:.1e} "
            f"(primal beta={beta!r}, dual beta={dual_beta!r})",
            primal=dh,
            dual=dual_value,
            gap=gap,
        )
    return dh, dual_value, gap


def optimal_test(rho, sigma, eps, tol=DEFAULT_TOLERANCES):
    """Neyman-Pearson optimal test between ``rho`` and ``sigma`` at type-I budget ``eps``.

    Raises :class:`CertificationError` if the dual bound does not match the
    primal value within ``tol.duality_gap_tol``.
    """
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"rho is {rho.shape[0]}-dimensional but sigma is {sigma.shape[0]}")
    sol = solve_blocks(rho[None], sigma[None], eps, tol)
    beta = max(sol.beta, 0.0)
    dh, dual_value, gap = certify(beta, sol.dual_beta, tol)
    return HypothesisTestResult(
        beta=beta,
        dh=dh,
        test=sol.tests[0],
        threshold=sol.threshold,
        mixing=sol.mixing,
        dual_value=dual_value,
        gap=gap,
        type_one=sol.type_one,
    )


def dh(rho, sigma, eps, tol=DEFAULT_TOLERANCES):
    return optimal_test(rho, sigma, eps, tol).dh


def type_two_error(rho, sigma, eps, tol=DEFAULT_TOLERANCES):
    return optimal_test(rho, sigma, eps, tol).beta


@dataclass(frozen=True)
class DualGrid:
    log10_mu_min: float = -8.0
    # eigenvalues of mu*rho - sigma carry ~mu * 1e-16 absolute error
    log10_mu_max: float = 8.0
    points: int = 161
    golden_iters: int = 120


def _dual_objective(rho, sigma, eps, mu):
    # mu(1-eps) - tr((mu rho - sigma)_+) rewritten with tr rho = tr sigma = 1
    w = np.linalg.eigvalsh(mu * rho - sigma)
    return 1.0 - mu * eps + float(w[w < 0].sum())


def dh_dual_oracle(rho, sigma, eps, grid=DualGrid()):
    """Upper bound on ``D_H^eps`` from a one-dimensional scan of the Lagrange dual.

    The concave dual objective is scanned on a log-spaced grid of
    multipliers and the best bracket refined by golden-section search.
    Returns ``+inf`` when the dual never exceeds zero.
    """
    rho = as_density(rho)
    sigma = as_density(sigma)
    eps = _check_eps(eps)
    xs = np.linspace(grid.log10_mu_min, grid.log10_mu_max, grid.points)
    vals = [_dual_objective(rho, sigma, eps, 10.0**x) for x in xs]
    i = int(np.argmax(vals))
    best = vals[i]
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc = _dual_objective(rho, sigma, eps, 10.0**c)
    fd = _dual_objective(rho, sigma, eps, 10.0**d)
    for _ in range(grid.golden_iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = _dual_objective(rho, sigma, eps, 10.0**c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = _dual_objective(rho, sigma, eps, 10.0**d)
    best = max(best, fc, fd)
    if best <= 1e-14:
        return math.inf
    return settings.neg_log(best)


def relative_entropy(rho, sigma, rank_tol=1e-9):
    """Umegaki relative entropy ``tr rho (log rho - log sigma)``; ``+inf`` off support."""
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError("rho and sigma differ in dimension")
    p, u = eig_hermitian(rho)
    q, w = eig_hermitian(sigma)
    keep_q = q > rank_tol
    ps = projector(w[:, keep_q])
    if float(np.trace(rho - ps @ rho).real) > rank_tol:
        return math.inf
    keep_p = p > 0.0
    base = settings.log_base()
    overlap = np.abs(u[:, keep_p].conj().T @ w[:, keep_q]) ** 2
    cross = float(p[keep_p] @ overlap @ np.log(q[keep_q]))
    self_term = float(p[keep_p] @ np.log(p[keep_p]))
    return max((self_term - cross) / math.log(base), 0.0)


def renyi0(rho, sigma, rank_tol=1e-9):
    """Order-zero Renyi relative entropy ``-log tr(Pi_rho sigma)``."""
    rho = as_density(rho)
    sigma = as_density(sigma)
    p, u = eig_hermitian(rho)
    pi = projector(u[:, p > rank_tol])
    overlap = float(np.trace(pi @ sigma).real)
    if overlap <= rank_tol:
        return math.inf
    return settings.neg_log(overlap)


def classical_beta(p, q, eps):
    """Minimal type-II error between distributions ``p`` and ``q`` (randomized NP test)."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DimensionError("distributions differ in length")
    eps = _check_eps(eps)
    ratio = np.full(p.shape, math.inf)
    pos = q > 0
    ratio[pos] = p[pos] / q[pos]
    order = np.argsort(-ratio, kind="stable")
    target = 1.0 - eps
    acc = beta = 0.0
    for i in order:
        if p[i] <= 0.0:
            continue
        if acc + p[i] >= target:
            return beta + (target - acc) / p[i] * q[i]
        acc += p[i]
        beta += q[i]
    return beta


def classical_dh(p, q, eps):
    return settings.neg_log(classical_beta(p, q, eps))


def von_neumann_entropy(rho):
    w = np.linalg.eigvalsh(as_density(rho))
    w = w[w > 0.0]
    return max(float(-(w @ np.log(w))) / math.log(settings.log_base()), 0.0)
