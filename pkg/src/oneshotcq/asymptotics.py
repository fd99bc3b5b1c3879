"""Finite-n tensor-power experiments.

Stein tables compare ``(1/n) D_H^eps(rho^n || sigma^n)`` with ``D(rho || sigma)``;
capacity rows compare the one-shot bounds of the ``n``-fold channel, divided
by ``n``, with the single-letter Holevo quantity. Only finite ``n`` is ever
evaluated, so these are trends, not limits.
"""

import csv
import io
import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .cq_channel import (
    CQChannel,
    InputSearchConfig,
    converse_bound,
    holevo_information,
    optimize_achievability,
)
from .hypothesis_testing import DEFAULT_TOLERANCES, dh, relative_entropy
from .operators import as_density, check_dim, tensor

LABEL_SEP = ","
FULL_MODE_CAP = 64


def tensor_power(rho, n):
    """``rho (x) ... (x) rho`` (``n`` factors), folded from the left."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rho = np.asarray(rho, dtype=np.complex128)
    check_dim(rho.shape[0] ** n)
    return reduce(tensor, [rho] * n)


@dataclass(frozen=True)
class SteinRow:
    n: int
    dh_rate: float
    rel_ent: float
    gap: float


def stein_table(rho, sigma, eps, n_max, tol=DEFAULT_TOLERANCES):
    """Rows ``n = 1..n_max`` of the normalized hypothesis-testing rate against ``D(rho||sigma)``."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rho = as_density(rho)
    sigma = as_density(sigma)
    check_dim(rho.shape[0] ** n_max)
    d = relative_entropy(rho, sigma)
    rows = []
    for n in range(1, n_max + 1):
        rate = dh(tensor_power(rho, n), tensor_power(sigma, n), eps, tol) / n
        rows.append(SteinRow(n, rate, d, rate - d))
    return rows


def product_channel(ch, n):
    """The memoryless ``n``-fold extension; labels are comma-joined input words."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    check_dim(ch.size ** n)
    check_dim(ch.dim_out ** n)
    if n == 1:
        return ch
    words = list(itertools.product(range(ch.size), repeat=n))
    labels = tuple(LABEL_SEP.join(ch.labels[i] for i in w) for w in words)
    outputs = np.array([reduce(np.kron, [ch.outputs[i] for i in w]) for w in words])
    return CQChannel(labels, outputs)


def iid_expansion(k, n):
    """Map a distribution on ``k`` letters to its ``n``-fold product in word order."""
    words = np.array(list(itertools.product(range(k), repeat=n)))

    def expand(p):
        return np.prod(np.asarray(p)[words], axis=1)

    return expand


@dataclass(frozen=True)
class CapacityRow:
    n: int
    eps: float
    rate_upper: float
    rate_lower: float
    holevo: float


def _single_letter(p_word, k, n):
    """Average single-letter marginal of a distribution on ``n``-letter words."""
    words = np.array(list(itertools.product(range(k), repeat=n)))
    marg = np.zeros(k)
    for pos in range(n):
        np.add.at(marg, words[:, pos], p_word)
    return marg / n


def capacity_rows(ch, eps, n_max, input_mode="iid", search=InputSearchConfig(), tol=DEFAULT_TOLERANCES):
    """Per-letter converse and achievability rates of the ``n``-fold channel, ``n = 1..n_max``.

    ``input_mode="iid"`` searches product inputs only, so ``rate_upper`` is a
    lower estimate of the supremum over all inputs; ``"full"`` searches the
    whole simplex on ``X^n`` and needs ``|X|^n <= 64``. The achievability
    rate is taken at the input maximizing the converse, clipped at zero.
    ``holevo`` is the single-letter mutual information at the letter
    marginal of that input.
    """
    if input_mode not in ("iid", "full"):
        raise ValueError(f"input_mode must be 'iid' or 'full', got {input_mode!r}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    rows = []
    for n in range(1, n_max + 1):
        chn = product_channel(ch, n)
        if input_mode == "iid":
            conv = converse_bound(chn, eps, search, tol, expand=iid_expansion(ch.size, n), k=ch.size)
        else:
            if chn.size > FULL_MODE_CAP:
                raise ValueError(f"full input search needs |X|^n <= {FULL_MODE_CAP}, got {chn.size}")
            conv = converse_bound(chn, eps, search, tol)
        lower = 0.0
        if eps > 0.0:
            lower = max(0.0, optimize_achievability(chn, eps, conv.input_dist, tol=tol).rate)
        marg = _single_letter(conv.input_dist, ch.size, n)
        rows.append(CapacityRow(n, eps, conv.value / n, lower / n, holevo_information(ch, marg)))
    return rows


def rows_to_csv(rows, fields, header=None):
    """CSV text with a fixed column order; floats at 12 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields if header is None else header)
    for r in rows:
        w.writerow([_cell(getattr(r, f)) for f in fields])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.12g}"


STEIN_FIELDS = ("n", "dh_rate", "rel_ent", "gap")
CAPACITY_FIELDS = ("n", "eps", "rate_upper", "rate_lower", "holevo")


def stein_csv(rows):
    return rows_to_csv(rows, STEIN_FIELDS)


def capacity_csv(rows, input_mode):
    """Capacity rows; with i.i.d. inputs the converse column is only a best-found lower estimate."""
    upper = "rate_upper_iid_best_found" if input_mode == "iid" else "rate_upper_best_found"
    header = ("n", "eps", upper, "rate_lower", "holevo_at_best_input")
    return rows_to_csv(rows, CAPACITY_FIELDS, header)
