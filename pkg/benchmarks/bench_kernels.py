"""Time the compiled threshold search against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both backends run on the same random block stacks and must return the same
threshold; the table reports the median wall time per solve.
"""

import argparse
import statistics
import time

import numpy as np

from oneshotcq import _kernels_py
from oneshotcq.operators import random_density

try:
    from oneshotcq import _kernels
except ImportError:
    _kernels = None

CASES = [(1, 2), (1, 6), (1, 16), (1, 64), (8, 4), (32, 8), (1, 256)]


def make_blocks(k, d, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    rhos = np.array([random_density(d, seed=rng) for _ in range(k)])
    avg = np.einsum("x,xij->ij", p, rhos)
    return p[:, None, None] * rhos, p[:, None, None] * avg[None]


def time_solve(mod, R, S, eps, t_hi, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = mod.locate_threshold(R, S, eps, t_hi)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernel not built; only the numpy backend is available")
    print(f"{'blocks':>6} {'dim':>4} {'numpy [us]':>12} {'cython [us]':>12} {'speedup':>8} {'iters':>5}")
    for k, d in CASES:
        R, S = make_blocks(k, d, seed=1000 * k + d)
        t_hi = 2.0 * k * d
        repeat = max(3, args.repeat // (1 + d // 32))
        t_py, out_py = time_solve(_kernels_py, R, S, args.eps, t_hi, repeat)
        if _kernels is None:
            print(f"{k:>6} {d:>4} {t_py * 1e6:>12.1f} {'-':>12} {'-':>8} {out_py[3]:>5}")
            continue
        t_cy, out_cy = time_solve(_kernels, R, S, args.eps, t_hi, repeat)
        assert abs(out_py[0] - out_cy[0]) <= 1e-9 * out_py[0], (out_py, out_cy)
        print(f"{k:>6} {d:>4} {t_py * 1e6:>12.1f} {t_cy * 1e6:>12.1f} {t_py / t_cy:>8.2f} {out_cy[3]:>5}")


if __name__ == "__main__":
    main()
