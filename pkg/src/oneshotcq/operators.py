"""Dense complex Hermitian linear algebra.

Operators are plain ``numpy`` arrays of dtype ``complex128``. The validating
constructors (:func:`as_hermitian`, :func:`as_density`,
:func:`as_test_operator`) return a fresh symmetrized copy, so downstream code
may assume exact Hermiticity.

Composite systems use row-major indexing: the basis vector ``|i>|k>`` of
``A (x) B`` has index ``i * dim(B) + k``, which is what ``numpy.kron``
produces.
"""

from dataclasses import dataclass

import numpy as np

from . import settings
from .errors import CapExceededError, DimensionError, NumericalError, ValidationError

PSD_CLAMP = 1e-10
TRACE_TOL = 1e-9
TEST_CLAMP = 1e-9
KRAUS_TOL = 1e-9


def _square(a, name="operator"):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def as_hermitian(a, tol=1e-8):
    """Return ``(a + a^dagger) / 2`` after checking ``a`` is Hermitian up to ``tol``."""
    a = _square(a)
    herm = 0.5 * (a + a.conj().T)
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - herm).max() > tol * scale:
        raise ValidationError("matrix is not Hermitian")
    return herm


def _clamp_spectrum(h, lo, hi, lo_tol, hi_tol, what):
    w, v = eig_hermitian(h)
    if w[-1] < lo - lo_tol or (hi is not None and w[0] > hi + hi_tol):
        raise ValidationError(
            f"{what}: eigenvalues span [{w[-1]:.3e}, {w[0]:.3e}], outside the allowed range"
        )
    clipped = np.clip(w, lo, hi)
    if np.array_equal(clipped, w):
        return h
    out = (v * clipped) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def as_density(a):
    """Validate a density operator (PSD, unit trace) and clamp rounding noise."""
    h = as_hermitian(a)
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"density operator has trace {tr!r}, expected 1")
    return _clamp_spectrum(h, 0.0, None, PSD_CLAMP, 0.0, "density operator")


def as_test_operator(a):
    """Validate ``0 <= Q <= I`` and clamp eigenvalues into [0, 1]."""
    h = as_hermitian(a)
    return _clamp_spectrum(h, 0.0, 1.0, TEST_CLAMP, TEST_CLAMP, "test operator")


def eig_hermitian(h):
    """Eigen-decomposition with eigenvalues sorted in descending order.

    Returns ``(w, v)`` where ``v[:, i]`` is the eigenvector for ``w[i]``.
    """
    h = np.asarray(h, dtype=np.complex128)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on a {h.shape[0]}x{h.shape[0]} matrix: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def check_dim(dim, cap=None):
    cap = settings.dim_cap() if cap is None else cap
    if dim > cap:
        raise CapExceededError(f"composite dimension {dim} exceeds cap {cap}")


def tensor(a, b, cap=None):
    """Kronecker product ``a (x) b``."""
    a = _square(a)
    b = _square(b)
    check_dim(a.shape[0] * b.shape[0], cap)
    return np.kron(a, b)


def partial_trace(m, dims, keep):
    """Trace out one factor of a bipartite operator.

    ``dims`` is ``(dA, dB)`` and ``keep`` is ``"A"`` or ``"B"``.
    """
    m = _square(m)
    da, db = (int(d) for d in dims)
    if da * db != m.shape[0]:
        raise DimensionError(f"operator of dim {m.shape[0]} is not {da}x{db}")
    t = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def positive_part(h):
    w, v = eig_hermitian(h)
    wp = np.clip(w, 0.0, None)
    out = (v * wp) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def projector(vecs):
    """Orthogonal projector onto the span of the orthonormal columns ``vecs``."""
    p = vecs @ vecs.conj().T
    return 0.5 * (p + p.conj().T)


def support_projector(rho, rank_tol=1e-9):
    w, v = eig_hermitian(rho)
    return projector(v[:, w > rank_tol])


def kernel_projector(rho, rank_tol=1e-9):
    w, v = eig_hermitian(rho)
    return projector(v[:, w <= rank_tol])


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map ``rho -> sum_k K rho K^dagger``.

    ``kraus`` has shape ``(n_kraus, dim_out, dim_in)``.
    """

    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3:
            raise DimensionError("kraus operators must form a (n, dim_out, dim_in) array")
        gram = np.einsum("kji,kjl->il", k.conj(), k)
        if np.abs(gram - np.eye(k.shape[2])).max() > KRAUS_TOL:
            raise ValidationError("Kraus operators are not trace preserving")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim_in(self):
        return self.kraus.shape[2]

    @property
    def dim_out(self):
        return self.kraus.shape[1]

    def __call__(self, rho):
        return apply_channel(self, rho)


def apply_channel(ch, rho):
    rho = _square(rho)
    if rho.shape[0] != ch.dim_in:
        raise DimensionError(f"channel expects dim {ch.dim_in}, got {rho.shape[0]}")
    out = np.einsum("kij,jl,kml->im", ch.kraus, rho, ch.kraus.conj())
    return 0.5 * (out + out.conj().T)


def identity_channel(dim):
    return KrausChannel(np.eye(dim)[None])


def dephasing_channel(dim):
    """Complete dephasing in the computational basis."""
    k = np.zeros((dim, dim, dim), dtype=np.complex128)
    for i in range(dim):
        k[i, i, i] = 1.0
    return KrausChannel(k)


def partial_trace_channel(dims, keep):
    """Partial trace written as a channel with ``dim(traced)`` Kraus operators."""
    da, db = dims
    if keep == "A":
        ks = [np.kron(np.eye(da), np.eye(db)[j][None, :]) for j in range(db)]
    elif keep == "B":
        ks = [np.kron(np.eye(da)[j][None, :], np.eye(db)) for j in range(da)]
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return KrausChannel(np.array(ks))


def _ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    g = _ginibre(rng, dim, dim)
    return 0.5 * (g + g.conj().T)


def random_density(dim, rank=None, seed=None):
    """Random state ``G G^dagger / tr`` from a ``dim x rank`` Gaussian ``G``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = _ginibre(rng, dim, rank)
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_pure(dim, seed=None):
    return random_density(dim, 1, seed)


def random_test(dim, seed=None):
    """Random ``0 <= Q <= I`` with logistic-squashed Gaussian eigenvalues."""
    rng = np.random.default_rng(seed)
    g = _ginibre(rng, dim, dim)
    u, _ = np.linalg.qr(g)
    w = 1.0 / (1.0 + np.exp(-2.0 * rng.standard_normal(dim)))
    q = (u * w) @ u.conj().T
    return 0.5 * (q + q.conj().T)


def random_channel(dim_in, dim_out, n_kraus, seed=None):
    """Random channel sliced from a Haar-like isometry ``C^dim_in -> C^(n_kraus*dim_out)``."""
    if n_kraus * dim_out < dim_in:
        raise ValueError("n_kraus * dim_out must be at least dim_in for an isometry")
    rng = np.random.default_rng(seed)
    g = _ginibre(rng, n_kraus * dim_out, dim_in)
    v, r = np.linalg.qr(g)
    v = v * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(v.reshape(n_kraus, dim_out, dim_in))
