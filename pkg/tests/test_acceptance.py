"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import functools
import random
import sys
import time
from fractions import Fraction
from pathlib import Path


sys.path.insert(0, str(Path(__file__).parent))

from corpus import EPS, bmv_corpus, delta_large_corpus, sandwich_corpus  # noqa: E402
from invariants import InvariantObserver  # noqa: E402

from nashcap.certify import (  # noqa: E402
    auxiliary_bound,
    auxiliary_upper_bound,
    bmv_bound,
    bmv_greedy_set,
    bmv_uniform_values,
    certify,
    individual_guarantee,
    large_market_check,
    nsw_nth_power,
    theoretical_factor,
)
from nashcap.generators import envy_unit, gen_capped_envy, gen_lower_bound, gen_multicopy_envy  # noqa: E402
from nashcap.instance import make_instance  # noqa: E402
from nashcap.market import MarketState, is_eps_p_ef1  # noqa: E402
from nashcap.numerics import INF, rat_root_ratio  # noqa: E402
from nashcap.oracle import brute_force_opt, is_utility_ef1  # noqa: E402
from nashcap.solver import dumps_output, solve  # noqa: E402

RESULTS: list[str] = []
SLACK = 1e-9
HUNDREDTH = Fraction(1, 100)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def three_one_one():
    return make_instance([1, 1, 1], [None, None], [[[3], [1], [1]]] * 2)


# -- shared runs over the random corpus ----------------------------------------------

@functools.lru_cache(maxsize=None)
def sandwich_runs():
    t0 = time.perf_counter()
    runs = []
    for inst in sandwich_corpus():
        obs = InvariantObserver(EPS)
        out = solve(inst, EPS, observer=obs)
        obs.check_output(out)
        runs.append((inst, out, obs, brute_force_opt(inst).best_nsw_nth_power, certify(inst, out)))
    return runs, time.perf_counter() - t0


# -- criteria --------------------------------------------------------------------------

def test_c01_lower_bound_reproduction():
    t0 = time.perf_counter()
    inst = gen_lower_bound(3, 1, 666)
    out = solve(inst, Fraction(1, 4))
    opt = brute_force_opt(inst).best_nsw_nth_power
    alg = nsw_nth_power(inst, out.allocation)
    ratio = rat_root_ratio(opt, alg, inst.n)
    expected = (666 / 667) ** (2 / 3) * 3 ** (1 / 3)
    elapsed = time.perf_counter() - t0
    ok = ratio >= 1.440 and abs(ratio - expected) < 1e-9 and elapsed < 1.0
    record(1, ok, f"OPT/ALG = {ratio:.9f} (closed form {expected:.9f}), {elapsed * 1000:.0f} ms")


def test_c02_factor_table():
    table = {0: 1.44467, 0.01: 1.44997, 0.02: 1.45523, 0.03: 1.46046, 0.04: 1.46566}
    worst = max(abs(theoretical_factor(g) - v) for g, v in table.items())
    record(2, worst < 5e-6, f"max deviation from the table {worst:.2e}")


def test_c03_worked_counterexamples():
    s = envy_unit(HUNDREDTH)
    mc, ce = gen_multicopy_envy(HUNDREDTH), gen_capped_envy(HUNDREDTH)
    a, b = brute_force_opt(mc), brute_force_opt(ce)
    ok = (
        a.best_nsw_nth_power == 10 * s ** 2
        and b.best_nsw_nth_power == 3 * s ** 2
        and not is_utility_ef1(mc, a.allocation)[0]
        and not is_utility_ef1(ce, b.allocation)[0]
    )
    record(3, ok, "optima 10 s^2 and 3 s^2, neither is EF1 in utilities")


def test_c04_solver_trace():
    r = 1 + HUNDREDTH
    s = envy_unit(HUNDREDTH)
    out = solve(gen_multicopy_envy(HUNDREDTH), HUNDREDTH)
    step = out.price_steps[0] if out.price_steps else None
    ok = (
        out.price_increases == 1
        and len(out.price_steps) == 1
        and step.beta1 == s
        and step.beta2 == INF
        and step.beta3 == 2 / r ** 2
        and step.beta4 == r ** 93
        and step.beta4 >= step.beta3
        and out.mbb[0] == r ** 2 / 2
        and is_eps_p_ef1(out.state, 4 * HUNDREDTH)[0]
    )
    record(4, ok, "one price step, beta = (s, inf, 2/r^2, r^93), alpha_1 = r^2/2, 4eps-p-EF1")


def test_c05_sandwich():
    runs, elapsed = sandwich_runs()
    r = 1 + EPS
    cap = r * theoretical_factor(4 * EPS)
    bad = []
    for k, (inst, out, _, opt, cert) in enumerate(runs):
        alg = nsw_nth_power(inst, out.allocation)
        opt_rounded = brute_force_opt(out.instance).best_nsw_nth_power
        ub = cert.upper_bound_nth_power
        within = rat_root_ratio(opt, alg, inst.n) <= cap + SLACK if opt > 0 else True
        if not (alg <= opt <= opt_rounded <= ub and within and cert.within_cap):
            bad.append(k)
    ok = len(runs) >= 500 and not bad and elapsed < 120
    record(5, ok, f"{len(runs)} instances, {len(bad)} violations, solver+oracle+certify {elapsed:.1f} s")


def test_c06_invariants():
    runs, _ = sandwich_runs()
    failures = [(k, obs.failures[:2]) for k, (_, _, obs, _, _) in enumerate(runs) if obs.failures]
    events = sum(obs.events for _, _, obs, _, _ in runs)
    record(6, not failures, f"{events} events checked, failing runs: {failures[:3]}")


def test_c07_individual_guarantee():
    runs, _ = sandwich_runs()
    limit = 2 + 4 * EPS
    worst = max((cert.worst_individual_ratio for *_, cert in runs), default=0)
    s = envy_unit(HUNDREDTH)
    ratio, _ = individual_guarantee(solve(gen_multicopy_envy(HUNDREDTH), HUNDREDTH))
    ok = worst <= limit and ratio == (2 * s + 1) / (2 * s) and ratio > Fraction(6, 5)
    record(7, ok, f"worst corpus ratio {float(worst):.4f} <= {float(limit)}, envy example {float(ratio):.4f}")


def test_c08_certificate_example():
    aux = auxiliary_bound([3, 1, 1], [None, None])
    state = MarketState(three_one_one(), [[1, 1, 0], [0, 0, 1]], [Fraction(3), Fraction(1), Fraction(1)],
                        [Fraction(1), Fraction(1)])
    via_state = auxiliary_upper_bound(state).unscaled_nth_power
    ok = aux.bound_nth_power == via_state == 6 < 8 and (aux.h, aux.k, aux.delta) == (1, 0, 2)
    record(8, ok, f"bound^2 = {via_state} with h={aux.h}, k={aux.k}, delta={aux.delta}")


def test_c09_bmv():
    bad = 0
    corpus = bmv_corpus()
    for inst in corpus:
        out = solve(inst, EPS)
        bound, S = bmv_bound(out.instance, out.mbb)
        opt_r = brute_force_opt(out.instance).best_nsw_nth_power
        opt = brute_force_opt(inst).best_nsw_nth_power
        values = bmv_uniform_values(out.instance, out.mbb)
        orders = {bmv_greedy_set(values, inst.n, random.Random(k)) for k in range(10)}
        if not (bound >= opt_r >= opt and orders == {S}):
            bad += 1
    record(9, len(corpus) >= 200 and bad == 0, f"{len(corpus)} instances, {bad} failures")


def test_c10_large_markets():
    delta = Fraction(1, 2)
    limit = float((1 + 4 * EPS) / (1 - delta))
    corpus = delta_large_corpus()
    worst, bad = 0.0, 0
    for inst in corpus:
        out = solve(inst, EPS)
        rep = large_market_check(out, delta)
        opt = brute_force_opt(out.instance).best_nsw_nth_power
        ratio = rat_root_ratio(opt, nsw_nth_power(out.instance, out.allocation), inst.n)
        # the original utilities obey the same bound on this corpus
        plain = rat_root_ratio(brute_force_opt(inst).best_nsw_nth_power, nsw_nth_power(inst, out.allocation), inst.n)
        worst = max(worst, ratio, plain)
        if not (max(ratio, plain) <= limit + SLACK and rep.ok):
            bad += 1
    record(10, len(corpus) >= 50 and bad == 0, f"{len(corpus)} instances, worst OPT/ALG {worst:.4f} <= {limit}")


def test_c11_determinism():
    instances = [gen_lower_bound(3, 1, 666), gen_multicopy_envy(HUNDREDTH), gen_capped_envy(HUNDREDTH),
                 three_one_one()]
    instances += sandwich_corpus() + bmv_corpus() + delta_large_corpus()
    eps_for = {1: HUNDREDTH, 2: HUNDREDTH}
    diffs = 0
    for k, inst in enumerate(instances):
        eps = eps_for.get(k, EPS)
        if dumps_output(solve(inst, eps)) != dumps_output(solve(inst, eps)):
            diffs += 1
    record(11, diffs == 0, f"{len(instances)} instances solved twice, {diffs} differing outputs")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
