"""Regenerate tests/data/regression.json from certified solves.

The values are change detectors, not ground truth: every Stein entry carries
the duality gap of the solve that produced it.
"""

import json
from pathlib import Path

import numpy as np

from oneshotcq.asymptotics import capacity_rows, tensor_power
from oneshotcq.cq_channel import CQChannel
from oneshotcq.hypothesis_testing import optimal_test, relative_entropy

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "regression.json"
PLUS = np.full((2, 2), 0.5)
PAIRS = {
    "commuting": (np.diag([0.9, 0.1]), np.diag([0.5, 0.5]), 10),
    "noncommuting": (PLUS, np.diag([2 / 3, 1 / 3]), 8),
}
EPS = 0.05


def stein_fixture(rho, sigma, n_max):
    rows = []
    for n in range(1, n_max + 1):
        res = optimal_test(tensor_power(rho, n), tensor_power(sigma, n), EPS)
        rows.append({"n": n, "dh_rate": res.dh / n, "gap": res.gap})
    return {"eps": EPS, "rel_ent": relative_entropy(rho, sigma), "rows": rows}


def main():
    doc = {"stein": {name: stein_fixture(*pair) for name, pair in PAIRS.items()}}
    ch = CQChannel.from_states([np.diag([1.0, 0.0]), PLUS])
    doc["capacity_zero_plus"] = {
        "eps": EPS,
        "rows": [
            {"n": r.n, "rate_upper": r.rate_upper, "rate_lower": r.rate_lower, "holevo": r.holevo}
            for r in capacity_rows(ch, EPS, 5)
        ],
    }
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
