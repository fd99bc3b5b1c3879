"""Command-line front end.

States and channels share one JSON schema::

    {"dim_out": 2,
     "inputs": [{"label": "0", "state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]}

where every matrix entry is an ``[re, im]`` pair. A state file holds exactly
one input. Output is CSV with 12 significant digits.

Exit codes: 0 success, 2 parse or input error, 3 certification failure,
4 dimension cap exceeded.
"""

import argparse
import json
import sys

import numpy as np

from . import settings
from .asymptotics import capacity_csv, capacity_rows, rows_to_csv, stein_csv, stein_table
from .coding import hayashi_nagaoka_suite, random_coding_experiment
from .cq_channel import CQChannel, InputSearchConfig, achievable_rate, as_distribution, one_shot_bounds
from .errors import CapExceededError, CertificationError, DimensionError, ValidationError
from .hypothesis_testing import Tolerances, optimal_test

EXIT_OK, EXIT_PARSE, EXIT_CERT, EXIT_CAP = 0, 2, 3, 4


class ParseError(ValueError):
    pass


def _matrix(raw, d, where):
    if not isinstance(raw, list) or len(raw) != d:
        raise ParseError(f"{where}: expected {d} rows")
    out = np.empty((d, d), dtype=np.complex128)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != d:
            raise ParseError(f"{where}: row {i} must have {d} entries")
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                raise ParseError(f"{where}: entry [{i}][{j}] must be an [re, im] pair of numbers")
            out[i, j] = complex(z[0], z[1])
    return out


def parse_channel(doc, source="<input>"):
    """Build a :class:`CQChannel` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    d = doc.get("dim_out")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError(f"{source}: 'dim_out' must be a positive integer")
    inputs = doc.get("inputs")
    if not isinstance(inputs, list) or not inputs:
        raise ParseError(f"{source}: 'inputs' must be a non-empty list")
    labels, states = [], []
    for k, item in enumerate(inputs):
        where = f"{source}: inputs[{k}]"
        if not isinstance(item, dict) or "label" not in item or "state" not in item:
            raise ParseError(f"{where}: needs 'label' and 'state'")
        if not isinstance(item["label"], str):
            raise ParseError(f"{where}.label must be a string")
        labels.append(item["label"])
        states.append(_matrix(item["state"], d, f"{where}.state"))
    try:
        return CQChannel(tuple(labels), np.array(states))
    except (ValidationError, DimensionError) as exc:
        raise ParseError(f"{source}: {exc}") from exc


def load_channel(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return parse_channel(doc, path)


def load_state(path):
    ch = load_channel(path)
    if ch.size != 1:
        raise ParseError(f"{path}: a state file must hold exactly one input, found {ch.size}")
    return ch.outputs[0]


def dump_channel(ch):
    """JSON text for a channel in the file schema."""
    doc = {
        "dim_out": ch.dim_out,
        "inputs": [
            {"label": x, "state": [[[float(z.real), float(z.imag)] for z in row] for row in rho]}
            for x, rho in zip(ch.labels, ch.outputs)
        ],
    }
    return json.dumps(doc, indent=1)


def _f(x):
    return f"{float(x):.12g}"


def _csv_line(values):
    return ",".join(values) + "\n"


def _tolerances(args):
    return Tolerances(duality_gap_tol=args.tol_gap)


def _input_dist(ch, text):
    if text is None:
        return np.full(ch.size, 1.0 / ch.size)
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"--input: {exc}") from exc
    try:
        return as_distribution(ch, vals)
    except (ValidationError, DimensionError) as exc:
        raise ParseError(f"--input: {exc}") from exc


def cmd_dh(args):
    rho, sigma = load_state(args.rho), load_state(args.sigma)
    res = optimal_test(rho, sigma, args.epsilon, _tolerances(args))
    header = "beta,dh,threshold,mixing,dual_value,gap\n"
    return header + _csv_line(_f(v) for v in (res.beta, res.dh, res.threshold, res.mixing,
                                                res.dual_value, res.gap))


def _search(args):
    return InputSearchConfig(step=args.grid_step)


def cmd_bounds(args):
    ch = load_channel(args.channel)
    tol = _tolerances(args)
    b = one_shot_bounds(ch, args.epsilon, _search(args), tol)
    cols = ["converse_R_best_found", "achievable_R", "best_eps_prime", "best_c"]
    vals = [_f(b.converse_R), _f(b.achievable_R), _f(b.best_eps_prime), _f(b.best_c)]
    if args.epsilon_prime is not None and args.c is not None:
        cols.append("achievable_R_at_given_params")
        vals.append(_f(achievable_rate(ch, args.epsilon, args.epsilon_prime, args.c, b.input_dist, tol)))
    cols += [f"p[{x}]" for x in ch.labels]
    vals += [_f(p) for p in b.input_dist]
    return _csv_line(cols) + _csv_line(vals)


def cmd_simulate(args):
    ch = load_channel(args.channel)
    rep = random_coding_experiment(ch, _input_dist(ch, args.input), args.rate, args.epsilon_prime,
                                   args.trials, args.seed, tol=_tolerances(args))
    return rep.to_csv()


def cmd_stein(args):
    rows = stein_table(load_state(args.rho), load_state(args.sigma), args.epsilon, args.n, _tolerances(args))
    return stein_csv(rows)


def cmd_capacity(args):
    ch = load_channel(args.channel)
    rows = capacity_rows(ch, args.epsilon, args.n, args.mode, _search(args), _tolerances(args))
    return capacity_csv(rows, args.mode)


def cmd_check_hn(args):
    checks = hayashi_nagaoka_suite(args.count, (args.dim_min, args.dim_max), seed=args.seed)
    rows = rows_to_csv(checks, ("c", "min_eig_slack")) if args.all_rows else ""
    worst = min(ch.min_eig_slack for ch in checks)
    failed = sum(not ch.passed for ch in checks)
    summary = "count,dim_min,dim_max,seed,min_slack,failures\n" + _csv_line(
        [str(args.count), str(args.dim_min), str(args.dim_max), str(args.seed), _f(worst), str(failed)]
    )
    return summary + rows, (EXIT_OK if failed == 0 else EXIT_CERT)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nats", action="store_true", help="report logarithms in nats instead of bits")
    common.add_argument("--tol-gap", type=float, default=1e-7, help="duality gap allowed for certification")
    common.add_argument("--out", help="write CSV here instead of stdout")

    parser = argparse.ArgumentParser(prog="oneshotcq", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dh", parents=[common], help="optimal test and D_H^eps between two states")
    p.add_argument("rho")
    p.add_argument("sigma")
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_dh)

    p = sub.add_parser("bounds", parents=[common], help="one-shot converse and achievability rates")
    p.add_argument("channel")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--epsilon-prime", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", parents=[common], help="random coding with square-root decoding")
    p.add_argument("channel")
    p.add_argument("--rate", type=float, required=True, help="log2 of the codebook size")
    p.add_argument("--epsilon-prime", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", help="comma-separated input distribution in label order (default uniform)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stein", parents=[common], help="tensor-power rates against the relative entropy")
    p.add_argument("rho")
    p.add_argument("sigma")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_stein)

    p = sub.add_parser("capacity", parents=[common], help="per-letter bounds of n-fold channels")
    p.add_argument("channel")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("iid", "full"), default="iid")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("check-hn", parents=[common], help="randomized operator-inequality check")
    p.add_argument("--dim-min", type=int, default=2)
    p.add_argument("--dim-max", type=int, default=16)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--all-rows", action="store_true", help="also list every check")
    p.set_defaults(func=cmd_check_hn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    code = EXIT_OK
    try:
        with settings.log_units("nats" if args.nats else "bits"):
            result = args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if isinstance(result, tuple):
        result, code = result
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(result)
    else:
        sys.stdout.write(result)
    return code


if __name__ == "__main__":
    sys.exit(main())
