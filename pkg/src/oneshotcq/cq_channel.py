"""Classical-quantum channels and their one-shot capacity bounds.

A cq channel maps each label ``x`` to an output state ``rho_x``. For an input
distribution ``P`` the joint state ``pi_AB = sum_x p_x |x><x| (x) rho_x`` is
block diagonal in the label register, as is ``pi_A (x) pi_B``, so the
hypothesis test between them is solved block by block with one shared
threshold and never needs the ``|X| d``-dimensional matrices.

Rates are in the configured log units (bits by default).
"""

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from . import settings
from .errors import DimensionError, ValidationError
from .hypothesis_testing import DEFAULT_TOLERANCES, certify, solve_blocks, von_neumann_entropy
from .operators import as_density


@dataclass(frozen=True)
class CQChannel:
    labels: tuple
    outputs: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise ValidationError("a channel needs at least one input label")
        if len(set(labels)) != len(labels):
            raise ValidationError("channel labels must be unique")
        outs = np.asarray(self.outputs, dtype=np.complex128)
        if outs.ndim != 3 or outs.shape[0] != len(labels):
            raise DimensionError("outputs must be a (|X|, d, d) stack matching the labels")
        outs = np.array([as_density(o) for o in outs])
        outs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "outputs", outs)

    @classmethod
    def from_states(cls, states, labels=None):
        states = [np.asarray(s) for s in states]
        if labels is None:
            labels = [str(i) for i in range(len(states))]
        return cls(tuple(labels), np.array(states, dtype=np.complex128))

    @property
    def size(self):
        return len(self.labels)

    @property
    def dim_out(self):
        return self.outputs.shape[1]

    def index(self, label):
        return self.labels.index(str(label))

    def output(self, label):
        return self.outputs[self.index(label)]


def as_distribution(ch, p):
    """Probability vector aligned with ``ch.labels`` from a sequence or a label mapping."""
    if isinstance(p, Mapping):
        unknown = set(map(str, p)) - set(ch.labels)
        if unknown:
            raise ValidationError(f"distribution names unknown labels {sorted(unknown)}")
        p = [float(p.get(x, p.get(_maybe_int(x), 0.0))) for x in ch.labels]
    p = np.asarray(p, dtype=float).ravel()
    if p.shape != (ch.size,):
        raise DimensionError(f"distribution has {p.size} entries for {ch.size} labels")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
        raise ValidationError("input distribution must be non-negative and sum to 1")
    return p


def _maybe_int(label):
    try:
        return int(label)
    except ValueError:
        return label


def uniform(ch):
    return np.full(ch.size, 1.0 / ch.size)


@dataclass(frozen=True)
class JointState:
    """``pi_AB`` kept as its blocks ``(p_x, rho_x)`` together with ``pi_B``."""

    probs: np.ndarray
    states: np.ndarray
    avg: np.ndarray

    def blocks(self):
        """Stacks ``(p_x rho_x)`` and ``(p_x pi_B)`` for the block solver."""
        R = self.probs[:, None, None] * self.states
        S = self.probs[:, None, None] * self.avg[None]
        return R, S

    def materialize(self):
        """Dense ``(pi_AB, pi_A, pi_B)``; only for cross-checks on small instances."""
        k, d = self.states.shape[:2]
        pi_ab = np.zeros((k * d, k * d), dtype=np.complex128)
        for x in range(k):
            pi_ab[x * d:(x + 1) * d, x * d:(x + 1) * d] = self.probs[x] * self.states[x]
        return pi_ab, np.diag(self.probs).astype(np.complex128), self.avg.copy()


def joint_state(ch, p):
    p = as_distribution(ch, p)
    avg = np.einsum("x,xij->ij", p, ch.outputs)
    return JointState(p, np.asarray(ch.outputs), 0.5 * (avg + avg.conj().T))


@dataclass(frozen=True)
class CQTestResult:
    """Optimal test between ``pi_AB`` and ``pi_A (x) pi_B``; ``tests[x]`` is block ``x``."""

    value: float
    beta: float
    tests: np.ndarray
    threshold: float
    mixing: float
    dual_value: float
    gap: float
    type_one: float


def dh_cq(js, eps, tol=DEFAULT_TOLERANCES):
    """``D_H^eps(pi_AB || pi_A (x) pi_B)`` by blockwise Neyman-Pearson.

    Zero-probability labels get zero tests.
    """
    live = js.probs > 0
    R, S = js.blocks()
    sol = solve_blocks(R[live], S[live], eps, tol)
    tests = np.zeros_like(R)
    tests[live] = sol.tests
    beta = max(sol.beta, 0.0)
    value, dual_value, gap = certify(beta, sol.dual_beta, tol, "cq hypothesis test")
    return CQTestResult(value, beta, tests, sol.threshold, sol.mixing, dual_value, gap, sol.type_one)


@dataclass(frozen=True)
class InputSearchConfig:
    step: float = 0.05
    max_grid_points: int = 2000
    refine_iters: int = 200
    min_step: float = 1e-4


def simplex_grid(k, n):
    """All points of the ``k``-simplex with coordinates in ``{0, 1/n, ..., 1}``."""
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n + k - 2 - prev)
        yield np.array(counts, dtype=float) / n


def _grid_resolution(k, config):
    n = max(1, int(round(1.0 / config.step)))
    while n > 1 and math.comb(n + k - 1, k - 1) > config.max_grid_points:
        n -= 1
    return n


def _normalized(p):
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def maximize_over_simplex(objective, k, config=InputSearchConfig()):
    """Grid search plus coordinate ascent with step halving.

    Returns ``(best_value, best_p)``. Deterministic; no global optimality is
    claimed.
    """
    if k == 1:
        p = np.ones(1)
        return objective(p), p
    n = _grid_resolution(k, config)
    best_p = np.full(k, 1.0 / k)
    best = objective(best_p)
    for p in simplex_grid(k, n):
        v = objective(p)
        if v > best:
            best, best_p = v, p
    delta = 0.5 / n
    for _ in range(config.refine_iters):
        if delta < config.min_step:
            break
        move_best, move_p = best, None
        for i in range(k):
            toward = (1.0 - delta) * best_p
            toward[i] += delta
            moves = [toward]
            if best_p[i] > 0.0 and best_p[i] < 1.0:
                away = best_p.copy()
                cut = min(delta, away[i])
                away[i] -= cut
                rest = np.arange(k) != i
                away[rest] += cut * best_p[rest] / best_p[rest].sum()
                moves.append(away)
            for q in moves:
                q = _normalized(q)
                v = objective(q)
                if v > move_best:
                    move_best, move_p = v, q
        if move_p is None:
            delta *= 0.5
        else:
            best, best_p = move_best, move_p
    return best, best_p


@dataclass(frozen=True)
class ConverseBound:
    value: float
    input_dist: np.ndarray


def converse_bound(ch, eps, search=InputSearchConfig(), tol=DEFAULT_TOLERANCES, expand=None, k=None):
    """Best found ``sup_P D_H^eps(pi_AB || pi_A (x) pi_B)``: the one-shot converse.

    ``expand`` maps a search point on a ``k``-simplex to a distribution on
    ``ch.labels``, e.g. an i.i.d. product for block channels; by default the
    search runs over the full simplex of ``ch``.
    """
    if expand is None:
        expand, k = (lambda p: p), ch.size

    def objective(p):
        return dh_cq(joint_state(ch, expand(p)), eps, tol).value

    value, p = maximize_over_simplex(objective, k, search)
    return ConverseBound(value, expand(p))


def penalty(eps, eps_prime, c):
    """``log((2 + c + 1/c) / (eps - (1 + c) eps'))`` subtracted by the achievability bound."""
    _check_achievability(eps, eps_prime, c)
    return settings.log((2.0 + c + 1.0 / c) / (eps - (1.0 + c) * eps_prime))


def optimal_c(eps, eps_prime):
    """Minimizer of :func:`penalty` over ``c > 0`` at fixed ``eps, eps'``."""
    return (eps - eps_prime) / (eps + eps_prime)


def _check_achievability(eps, eps_prime, c):
    if not 0.0 < eps_prime < eps < 1.0:
        raise ValueError(f"need 0 < eps' < eps < 1, got eps={eps}, eps'={eps_prime}")
    if not c > 0.0:
        raise ValueError(f"c must be positive, got {c}")
    if not eps - (1.0 + c) * eps_prime > 0.0:
        raise ValueError("need eps - (1 + c) eps' > 0")


def achievable_rate(ch, eps, eps_prime, c, p, tol=DEFAULT_TOLERANCES):
    """Rate guaranteed by random coding with square-root decoding; may be negative."""
    pen = penalty(eps, eps_prime, c)
    return dh_cq(joint_state(ch, p), eps_prime, tol).value - pen


@dataclass(frozen=True)
class AchievabilityResult:
    rate: float
    eps_prime: float
    c: float


def optimize_achievability(ch, eps, p, n_eps=64, n_c=64, c_range=(1e-3, 1e3), tol=DEFAULT_TOLERANCES):
    """Maximize :func:`achievable_rate` over ``(eps', c)``.

    ``eps'`` runs over ``eps * j / n_eps`` for ``0 < j < n_eps`` and ``c`` over a
    log grid; each ``eps'`` is also tried with the closed-form best ``c``, and
    the best ``eps'`` bracket is refined by golden-section search.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    js = joint_state(ch, p)
    cache = {}

    def dh_at(ep):
        if ep not in cache:
            cache[ep] = dh_cq(js, ep, tol).value
        return cache[ep]

    def best_for(ep):
        c = optimal_c(eps, ep)
        return dh_at(ep) - penalty(eps, ep, c), c

    cs = np.logspace(math.log10(c_range[0]), math.log10(c_range[1]), n_c)
    eps_grid = [eps * j / n_eps for j in range(1, n_eps)]
    best = AchievabilityResult(-math.inf, math.nan, math.nan)
    best_j = 0
    for j, ep in enumerate(eps_grid):
        for c in cs:
            if eps - (1.0 + c) * ep > 0.0:
                r = dh_at(ep) - penalty(eps, ep, c)
                if r > best.rate:
                    best, best_j = AchievabilityResult(r, ep, float(c)), j
        r, c = best_for(ep)
        if r > best.rate:
            best, best_j = AchievabilityResult(r, ep, c), j

    # the bracket reaches the open ends of (0, eps) when the best point is on the grid edge
    lo = eps_grid[best_j - 1] if best_j > 0 else 0.0
    hi = eps_grid[best_j + 1] if best_j + 1 < len(eps_grid) else eps
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(30):
        if hi - lo < 1e-9 * eps:
            break
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        (r1, c1), (r2, c2) = best_for(x1), best_for(x2)
        for r, ep, c in ((r1, x1, c1), (r2, x2, c2)):
            if r > best.rate:
                best = AchievabilityResult(r, ep, c)
        if r1 >= r2:
            hi = x2
        else:
            lo = x1
    return best


def holevo_information(ch, p):
    """Mutual information ``S(pi_B) - sum_x p_x S(rho_x)`` of the cq state."""
    js = joint_state(ch, p)
    inner = sum(px * von_neumann_entropy(rho) for px, rho in zip(js.probs, js.states) if px > 0)
    return max(von_neumann_entropy(js.avg) - inner, 0.0)


@dataclass(frozen=True)
class OneShotBounds:
    converse_R: float
    achievable_R: float
    best_eps_prime: float
    best_c: float
    input_dist: np.ndarray = field(repr=False)


def one_shot_bounds(ch, eps, search=InputSearchConfig(), tol=DEFAULT_TOLERANCES):
    """Converse searched over inputs; achievability evaluated at the converse maximizer.

    Using the same input for both sides keeps ``achievable_R <= converse_R``
    since the achievability term uses ``D_H^{eps'}`` with ``eps' < eps``.
    """
    conv = converse_bound(ch, eps, search, tol)
    if eps > 0.0:
        ach = optimize_achievability(ch, eps, conv.input_dist, tol=tol)
    else:
        ach = AchievabilityResult(-math.inf, math.nan, math.nan)
    return OneShotBounds(conv.value, ach.rate, ach.eps_prime, ach.c, conv.input_dist)
