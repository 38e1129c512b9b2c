"""Command-line entry point: ``nashcap solve|certify|oracle|gen|bench``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import generators
from .certify import certify, nsw_nth_power
from .instance import InvalidInstance, ParameterError, cap_and_round, check_eps, dumps_instance, load_instance
from .market import market_from_allocation
from .numerics import geometric_mean, rat_root_ratio, rat_to_json
from .oracle import OracleTooLarge, brute_force_opt, max_states, state_space_size
from .solver import IterationCapExceeded, SolverOutput, dumps_output, solution_from_dict, solve

EXIT_OK, EXIT_INPUT, EXIT_ABORT, EXIT_CERT = 0, 2, 3, 4

BENCH_HEADER = [
    "id", "n", "m", "M", "epsilon", "alg_nsw", "oracle_nsw", "upper_bound",
    "ratio_ub", "ratio_opt", "iterations", "wall_ms",
]
# bench runs the oracle only below this many allocations
BENCH_ORACLE_STATES = 200_000


class InputError(Exception):
    pass


def parse_rat(text: str) -> Fraction:
    """Rational literal such as ``1/4`` or ``3``; decimals like ``0.25`` are rejected."""
    try:
        if "." in text or "e" in text.lower():
            raise ValueError
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational literal: {text!r} (write e.g. 1/4)") from None


def _load(path) -> object:
    try:
        return load_instance(path)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e})") from None
    except InvalidInstance as e:
        raise InputError(f"{path}: invalid instance: " + "; ".join(e.errors)) from None
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: invalid instance: {e}") from None


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _eps(text: str) -> Fraction:
    try:
        return check_eps(parse_rat(text))
    except ParameterError as e:
        raise InputError(str(e)) from None


# -- commands -----------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst = _load(args.input)
    eps = _eps(args.epsilon)
    try:
        out = solve(inst, eps)
    except IterationCapExceeded as e:
        print(f"aborted: {e}", file=sys.stderr)
        return EXIT_ABORT
    _write(dumps_output(out), args.output)
    return EXIT_OK


def load_solution(inst, path) -> SolverOutput:
    """Rebuild a solver output for ``inst`` from a solution JSON file."""
    try:
        obj = json.loads(Path(path).read_text())
        eps, alloc, prices, mbb = solution_from_dict(obj)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InputError(f"{path}: malformed solution ({e})") from None
    try:
        eps = check_eps(eps)
    except ParameterError as e:
        raise InputError(f"{path}: {e}") from None
    n, m = inst.n, inst.m
    if len(alloc) != n or any(len(row) != m for row in alloc) or len(prices) != m or len(mbb) != n:
        raise InputError(f"solution shape does not match the instance ({n} agents, {m} goods)")
    for j in range(m):
        if any(row[j] < 0 for row in alloc) or sum(row[j] for row in alloc) != inst.copies[j]:
            raise InputError(f"good {j + 1}: allocated copies do not add up to {inst.copies[j]}")
    if any(a <= 0 for a in mbb) or any(p < 0 for p in prices):
        raise InputError("MBB ratios must be positive and prices non-negative")
    rounded = cap_and_round(inst, eps)
    return SolverOutput(market_from_allocation(rounded, alloc, prices, mbb), eps)


def cmd_certify(args) -> int:
    inst = _load(args.input)
    out = load_solution(inst, args.solution)
    try:
        cert = certify(inst, out)
    except AssertionError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_ABORT
    _write(cert.dumps(), args.output)
    if not cert.ok:
        reasons = [name for name, ok in (("4eps-p-EF1", cert.ef1_ok), ("MBB interval", cert.interval_ok),
                                         ("ratio cap", cert.within_cap)) if not ok]
        print("certification failed: " + ", ".join(reasons), file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.input)
    try:
        res = brute_force_opt(inst)
    except OracleTooLarge as e:
        print(f"refused: {e} (set NSW_MAX_ORACLE_STATES to raise it)", file=sys.stderr)
        return EXIT_INPUT
    payload = {
        "best_nsw_nth_power": rat_to_json(res.best_nsw_nth_power),
        "best_nsw": geometric_mean(res.best_nsw_nth_power, inst.n),
        "allocation": res.allocation,
        "optima": res.optima,
        "states": res.states,
    }
    _write(json.dumps(payload, indent=1), args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    fam = args.family
    try:
        if fam == "lower-bound":
            inst = generators.gen_lower_bound(args.k, args.s, args.K)
        elif fam == "multicopy-envy":
            inst = generators.gen_multicopy_envy(_eps(args.epsilon))
        elif fam == "capped-envy":
            inst = generators.gen_capped_envy(_eps(args.epsilon))
        elif fam == "random":
            inst = generators.gen_random(
                args.n, args.m, args.max_copies, args.max_util, cap_mode=args.cap_mode, seed=args.seed
            )
        else:
            inst = generators.gen_delta_large(
                args.n, args.m, parse_rat(args.delta), seed=args.seed,
                max_copies=args.max_copies, max_util=args.max_util,
            )
    except (ValueError, ParameterError) as e:
        raise InputError(str(e)) from None
    _write(dumps_instance(inst), args.output)
    return EXIT_OK


def bench_one(path: str, eps: Fraction) -> dict:
    """One CSV row; failures are recorded in the row instead of raised."""
    row = {k: "" for k in BENCH_HEADER}
    row["id"] = Path(path).stem
    row["epsilon"] = str(eps)
    try:
        inst = load_instance(path)
    except Exception as e:  # noqa: BLE001 - any unreadable file becomes a row
        row["alg_nsw"] = f"error: {type(e).__name__}"
        return row
    row.update(n=inst.n, m=inst.m, M=inst.M)
    t0 = time.perf_counter()
    try:
        out = solve(inst, eps)
        cert = certify(inst, out)
    except IterationCapExceeded:
        row["alg_nsw"] = "error: iteration cap"
        return row
    except Exception as e:  # noqa: BLE001
        row["alg_nsw"] = f"error: {type(e).__name__}"
        return row
    wall = (time.perf_counter() - t0) * 1000
    n = inst.n
    alg = nsw_nth_power(inst, out.allocation)
    row["alg_nsw"] = repr(geometric_mean(alg, n))
    row["upper_bound"] = repr(geometric_mean(cert.upper_bound_nth_power, n))
    row["ratio_ub"] = repr(rat_root_ratio(cert.upper_bound_nth_power, alg, n))
    row["iterations"] = out.iterations
    row["wall_ms"] = f"{wall:.3f}"
    if state_space_size(inst) <= min(BENCH_ORACLE_STATES, max_states()):
        opt = brute_force_opt(inst).best_nsw_nth_power
        row["oracle_nsw"] = repr(geometric_mean(opt, n))
        row["ratio_opt"] = repr(rat_root_ratio(opt, alg, n))
    return row


def cmd_bench(args) -> int:
    eps = _eps(args.epsilon)
    d = Path(args.dir)
    if not d.is_dir():
        raise InputError(f"not a directory: {d}")
    files = sorted(str(p) for p in d.glob("*.json"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(bench_one, files, [eps] * len(files)))
    else:
        rows = [bench_one(f, eps) for f in files]
    sink = open(args.csv, "w", newline="") if args.csv not in (None, "-") else sys.stdout
    try:
        w = csv.DictWriter(sink, fieldnames=BENCH_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if sink is not sys.stdout:
            sink.close()
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nashcap", description="Approximate Nash social welfare with capped utilities.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the solver on an instance")
    s.add_argument("--input", required=True)
    s.add_argument("--epsilon", required=True, help="rational in (0, 1/4], e.g. 1/4")
    s.add_argument("--output", default="-")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="check a solution and bound its distance to the optimum")
    c.add_argument("--input", required=True)
    c.add_argument("--solution", required=True)
    c.add_argument("--output", default="-")
    c.set_defaults(func=cmd_certify)

    o = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    o.add_argument("--input", required=True)
    o.add_argument("--output", default="-")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("family", choices=["lower-bound", "multicopy-envy", "capped-envy", "random", "delta-large"])
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--s", type=int, default=1)
    g.add_argument("--K", type=int, default=666)
    g.add_argument("--epsilon", default="1/100")
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--max-copies", type=int, default=2)
    g.add_argument("--max-util", type=int, default=8)
    g.add_argument("--cap-mode", choices=["none", "random"], default="none")
    g.add_argument("--delta", default="1/2")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", default="-")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="solve and certify every *.json instance in a directory")
    b.add_argument("--dir", required=True)
    b.add_argument("--epsilon", required=True)
    b.add_argument("--csv", default="-")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
