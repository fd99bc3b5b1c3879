"""Pure-numpy threshold kernels; reference for the compiled ``_kernels`` module.

Both backends expose the same two functions and must agree to rounding.
Inputs are stacks ``R, S`` of shape ``(K, d, d)`` holding the blocks of the
two hypotheses (a single block for unstructured states). For a threshold
``t`` every block of ``R - t S`` is diagonalized and each eigenvector ``v``
is summarized by its Rayleigh values ``a = <v|R|v>`` and ``b = <v|S|v>``.
"""

import math

import numpy as np

BACKEND = "python"


def threshold_spectrum(R, S, t):
    """Eigen-data of ``R - t S`` blockwise.

    Returns ``(w, a, b, V)``: LAPACK eigenvalues (ascending per block),
    Rayleigh values against ``R`` and ``S``, and eigenvector stacks with
    ``V[k][:, i]`` the ``i``-th eigenvector of block ``k``.
    """
    w, V = np.linalg.eigh(R - t * S)
    a = np.einsum("kij,kji->ki", V.conj().transpose(0, 2, 1), R @ V).real
    b = np.einsum("kij,kji->ki", V.conj().transpose(0, 2, 1), S @ V).real
    return w, a, b, V


def _evaluate(R, S, t, eps):
    _, a, b, _ = threshold_spectrum(R, S, t)
    a = a.ravel()
    b = b.ravel()
    er = a - t * b
    tail = float(a[er <= 0.0].sum())

    order = np.argsort(er, kind="stable")
    cum = np.cumsum(a[order])
    over = np.nonzero(cum > eps)[0]
    j = int(over[0]) if over.size else len(order) - 1
    aj = a[order[j]]
    lam = min(1.0, max(0.0, (cum[j] - eps) / aj)) if aj > 0.0 else 0.0
    primal = float(b[order[j + 1:]].sum() + lam * b[order[j]])
    dual = float(np.minimum(a / t, b).sum() - eps / t)
    gap = (primal - dual) / primal if primal > 0.0 else 0.0
    bj = b[order[j]]
    newton = aj / bj if bj > 0.0 else math.inf
    return tail, gap, newton


def locate_threshold(R, S, eps, t_hi, rel_tol=1e-14, gap_tol=1e-13, max_iter=200):
    """Safeguarded root search for the Neyman-Pearson threshold.

    Keeps a bracket ``[lo, hi]`` with type-I error of the strict positive
    projector ``<= eps`` at ``lo`` and ``> eps`` at ``hi``. The candidate
    steps are, in order: Newton on the crossing eigenvalue (``t <- a/b``),
    exact where eigenvectors do not move with ``t``; the secant of the
    type-I error across the bracket, which covers the stretches where that
    error varies continuously; bisection. A candidate is taken only if it
    lands inside the bracket and at most halves the previous step. Stops
    when the relative primal-dual gap at the current point is below
    ``gap_tol`` or the bracket collapses in ``t``. The type-I error alone is
    no stopping signal: near the optimum it can be flat while beta still moves.

    Returns ``(t, lo, hi, n_iter)`` with ``t`` the evaluated point of
    smallest gap.
    """
    R = np.ascontiguousarray(R, dtype=np.complex128)
    S = np.ascontiguousarray(S, dtype=np.complex128)
    lo, hi = 0.0, float(t_hi)
    tail_lo = 0.0
    tail_hi, gap, newton = _evaluate(R, S, hi, eps)
    best_t, best_gap = hi, gap
    while tail_hi <= eps:
        if gap <= gap_tol:
            return float(hi), float(lo), float(hi), 0
        lo, tail_lo = hi, tail_hi
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("threshold bracket diverged")
        tail_hi, gap, newton = _evaluate(R, S, hi, eps)
        if gap < best_gap:
            best_t, best_gap = hi, gap

    n_iter = 0
    t = hi
    step_prev = hi - lo
    while n_iter < max_iter:
        n_iter += 1
        secant = lo + (eps - tail_lo) * (hi - lo) / (tail_hi - tail_lo) if tail_hi > tail_lo else -1.0
        if lo < newton < hi and abs(newton - t) <= 0.5 * step_prev:
            step, t = abs(newton - t), newton
        elif lo < secant < hi and abs(secant - t) <= 0.5 * step_prev:
            step, t = abs(secant - t), secant
        else:
            step = 0.5 * (hi - lo)
            t = lo + step
        step_prev = step
        tail, gap, newton = _evaluate(R, S, t, eps)
        if tail <= eps:
            lo, tail_lo = t, tail
        else:
            hi, tail_hi = t, tail
        if gap < best_gap:
            best_t, best_gap = t, gap
        if gap <= gap_tol:
            break
        if hi - lo <= rel_tol * hi:
            break
    return float(best_t), float(lo), float(hi), n_iter
