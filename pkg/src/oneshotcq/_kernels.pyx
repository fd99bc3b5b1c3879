# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled threshold kernels. Mirrors ``_kernels_py`` step for step.

The Python overhead of one numpy eigensolve dominates for the small blocks
this package works with, so the whole threshold search runs here against
LAPACK ``zheevd`` with workspaces allocated once per call.
"""

import numpy as np

from libc.math cimport INFINITY, fabs
from libc.stdlib cimport free, malloc, qsort
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

BACKEND = "cython"

ctypedef double complex zc


cdef struct Pair:
    double er
    double a
    double b
    int idx


cdef struct Eval:
    double tail
    double gap
    double newton


cdef int _cmp_pair(const void* x, const void* y) noexcept nogil:
    cdef const Pair* p = <const Pair*>x
    cdef const Pair* q = <const Pair*>y
    if p.er < q.er:
        return -1
    if p.er > q.er:
        return 1
    return (p.idx > q.idx) - (p.idx < q.idx)


cdef struct Work:
    int K
    int d
    zc* Rf
    zc* Sf
    zc* M
    zc* W
    double* w
    zc* work
    double* rwork
    int* iwork
    int lwork
    int lrwork
    int liwork
    Pair* pairs


cdef int _alloc(Work* ws, const zc[:, :, ::1] R, const zc[:, :, ::1] S) except -1:
    cdef int K = R.shape[0]
    cdef int d = R.shape[1]
    cdef int k, i, j, info = 0
    cdef int lwork = -1, lrwork = -1, liwork = -1
    cdef zc wq
    cdef double rq
    cdef int iq
    cdef char jobz = b'V'
    cdef char uplo = b'L'

    ws.K = K
    ws.d = d
    ws.Rf = <zc*>malloc(K * d * d * sizeof(zc))
    ws.Sf = <zc*>malloc(K * d * d * sizeof(zc))
    ws.M = <zc*>malloc(d * d * sizeof(zc))
    ws.W = <zc*>malloc(d * d * sizeof(zc))
    ws.w = <double*>malloc(d * sizeof(double))
    ws.pairs = <Pair*>malloc(K * d * sizeof(Pair))
    ws.work = NULL
    ws.rwork = NULL
    ws.iwork = NULL
    if not (ws.Rf and ws.Sf and ws.M and ws.W and ws.w and ws.pairs):
        raise MemoryError()
    # column-major copies for LAPACK/BLAS
    for k in range(K):
        for i in range(d):
            for j in range(d):
                ws.Rf[k * d * d + i + j * d] = R[k, i, j]
                ws.Sf[k * d * d + i + j * d] = S[k, i, j]

    zheevd(&jobz, &uplo, &d, ws.M, &d, ws.w, &wq, &lwork, &rq, &lrwork, &iq, &liwork, &info)
    if info != 0:
        raise ArithmeticError(f"zheevd workspace query failed (info={info})")
    ws.lwork = <int>wq.real + 1
    ws.lrwork = <int>rq + 1
    ws.liwork = iq + 1
    ws.work = <zc*>malloc(ws.lwork * sizeof(zc))
    ws.rwork = <double*>malloc(ws.lrwork * sizeof(double))
    ws.iwork = <int*>malloc(ws.liwork * sizeof(int))
    if not (ws.work and ws.rwork and ws.iwork):
        raise MemoryError()
    return 0


cdef void _free(Work* ws) noexcept:
    free(ws.Rf)
    free(ws.Sf)
    free(ws.M)
    free(ws.W)
    free(ws.w)
    free(ws.pairs)
    free(ws.work)
    free(ws.rwork)
    free(ws.iwork)


cdef int _spectrum(Work* ws, double t, double* w_out, zc* V_out) noexcept nogil:
    """Fill ``ws.pairs`` for threshold ``t``; optionally export eigen-data."""
    cdef int K = ws.K
    cdef int d = ws.d
    cdef int dd = d * d
    cdef int k, i, j, info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef char nn = b'N'
    cdef zc one = 1.0
    cdef zc zero = 0.0
    cdef double a, b
    cdef zc* Rk
    cdef zc* Sk
    for k in range(K):
        Rk = ws.Rf + k * dd
        Sk = ws.Sf + k * dd
        for i in range(dd):
            ws.M[i] = Rk[i] - t * Sk[i]
        zheevd(&jobz, &uplo, &d, ws.M, &d, ws.w, ws.work, &ws.lwork,
               ws.rwork, &ws.lrwork, ws.iwork, &ws.liwork, &info)
        if info != 0:
            return info
        zgemm(&nn, &nn, &d, &d, &d, &one, Rk, &d, ws.M, &d, &zero, ws.W, &d)
        for j in range(d):
            a = 0.0
            for i in range(d):
                a += (ws.M[i + j * d].conjugate() * ws.W[i + j * d]).real
            ws.pairs[k * d + j].a = a
        zgemm(&nn, &nn, &d, &d, &d, &one, Sk, &d, ws.M, &d, &zero, ws.W, &d)
        for j in range(d):
            b = 0.0
            for i in range(d):
                b += (ws.M[i + j * d].conjugate() * ws.W[i + j * d]).real
            ws.pairs[k * d + j].b = b
            ws.pairs[k * d + j].er = ws.pairs[k * d + j].a - t * b
            ws.pairs[k * d + j].idx = k * d + j
        if w_out != NULL:
            for j in range(d):
                w_out[k * d + j] = ws.w[j]
        if V_out != NULL:
            for i in range(d):
                for j in range(d):
                    V_out[k * dd + i * d + j] = ws.M[i + j * d]
    return 0


cdef int _evaluate(Work* ws, double t, double eps, Eval* out) noexcept nogil:
    cdef int n = ws.K * ws.d
    cdef int i, j, info
    cdef double tail = 0.0, cum = 0.0, lam, aj, bj
    cdef double primal = 0.0, dual = 0.0, x
    info = _spectrum(ws, t, NULL, NULL)
    if info != 0:
        return info
    for i in range(n):
        if ws.pairs[i].er <= 0.0:
            tail += ws.pairs[i].a
        x = ws.pairs[i].a / t
        dual += x if x < ws.pairs[i].b else ws.pairs[i].b
    dual -= eps / t
    qsort(ws.pairs, n, sizeof(Pair), _cmp_pair)
    j = n - 1
    for i in range(n):
        cum += ws.pairs[i].a
        if cum > eps:
            j = i
            break
    aj = ws.pairs[j].a
    bj = ws.pairs[j].b
    lam = 0.0
    if aj > 0.0:
        lam = (cum - eps) / aj
        if lam < 0.0:
            lam = 0.0
        elif lam > 1.0:
            lam = 1.0
    for i in range(j + 1, n):
        primal += ws.pairs[i].b
    primal += lam * bj
    out.tail = tail
    out.gap = (primal - dual) / primal if primal > 0.0 else 0.0
    out.newton = aj / bj if bj > 0.0 else INFINITY
    return 0


def threshold_spectrum(R, S, double t):
    """Eigen-data of ``R - t S`` blockwise; see ``_kernels_py.threshold_spectrum``."""
    cdef const zc[:, :, ::1] Rv = np.ascontiguousarray(R, dtype=np.complex128)
    cdef const zc[:, :, ::1] Sv = np.ascontiguousarray(S, dtype=np.complex128)
    cdef int K = Rv.shape[0]
    cdef int d = Rv.shape[1]
    cdef Work ws
    cdef int info
    w = np.empty((K, d), dtype=np.float64)
    V = np.empty((K, d, d), dtype=np.complex128)
    a = np.empty((K, d), dtype=np.float64)
    b = np.empty((K, d), dtype=np.float64)
    cdef double[:, ::1] wv = w
    cdef zc[:, :, ::1] Vv = V
    cdef double[:, ::1] av = a
    cdef double[:, ::1] bv = b
    cdef int i
    _alloc(&ws, Rv, Sv)
    try:
        with nogil:
            info = _spectrum(&ws, t, &wv[0, 0], &Vv[0, 0, 0])
        if info != 0:
            raise ArithmeticError(f"zheevd failed (info={info})")
        for i in range(K * d):
            av[ws.pairs[i].idx // d, ws.pairs[i].idx % d] = ws.pairs[i].a
            bv[ws.pairs[i].idx // d, ws.pairs[i].idx % d] = ws.pairs[i].b
    finally:
        _free(&ws)
    return w, a, b, V


def locate_threshold(R, S, double eps, double t_hi, double rel_tol=1e-14,
                     double gap_tol=1e-13, int max_iter=200):
    """Safeguarded Newton/bisection threshold search; see ``_kernels_py.locate_threshold``."""
    cdef const zc[:, :, ::1] Rv = np.ascontiguousarray(R, dtype=np.complex128)
    cdef const zc[:, :, ::1] Sv = np.ascontiguousarray(S, dtype=np.complex128)
    cdef Work ws
    cdef Eval ev
    cdef int info = 0, n_iter = 0
    cdef bint diverged = False
    cdef double lo = 0.0, hi = t_hi, tail_lo = 0.0, tail_hi
    cdef double best_t, best_gap, t, step, step_prev, secant
    _alloc(&ws, Rv, Sv)
    try:
        with nogil:
            info = _evaluate(&ws, hi, eps, &ev)
            best_t = hi
            best_gap = ev.gap
            tail_hi = ev.tail
            while info == 0 and tail_hi <= eps:
                if ev.gap <= gap_tol:
                    break
                lo = hi
                tail_lo = tail_hi
                hi *= 2.0
                if hi > 1e300:
                    diverged = True
                    break
                info = _evaluate(&ws, hi, eps, &ev)
                tail_hi = ev.tail
                if ev.gap < best_gap:
                    best_t = hi
                    best_gap = ev.gap
        if info != 0:
            raise ArithmeticError(f"zheevd failed (info={info})")
        if diverged:
            raise ArithmeticError("threshold bracket diverged")
        if tail_hi <= eps:
            return hi, lo, hi, 0

        with nogil:
            t = hi
            step_prev = hi - lo
            while n_iter < max_iter:
                n_iter += 1
                secant = -1.0
                if tail_hi > tail_lo:
                    secant = lo + (eps - tail_lo) * (hi - lo) / (tail_hi - tail_lo)
                if lo < ev.newton < hi and fabs(ev.newton - t) <= 0.5 * step_prev:
                    step = fabs(ev.newton - t)
                    t = ev.newton
                elif lo < secant < hi and fabs(secant - t) <= 0.5 * step_prev:
                    step = fabs(secant - t)
                    t = secant
                else:
                    step = 0.5 * (hi - lo)
                    t = lo + step
                step_prev = step
                info = _evaluate(&ws, t, eps, &ev)
                if info != 0:
                    break
                if ev.tail <= eps:
                    lo = t
                    tail_lo = ev.tail
                else:
                    hi = t
                    tail_hi = ev.tail
                if ev.gap < best_gap:
                    best_t = t
                    best_gap = ev.gap
                if ev.gap <= gap_tol:
                    break
                if hi - lo <= rel_tol * hi:
                    break
        if info != 0:
            raise ArithmeticError(f"zheevd failed (info={info})")
    finally:
        _free(&ws)
    return best_t, lo, hi, n_iter
