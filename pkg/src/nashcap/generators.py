"""Named instances and seeded random families."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .instance import Instance, check_eps, make_instance
from .numerics import as_rat, next_power_up

# rounding inflates any utility by less than this for every admissible eps
_MAX_ROUNDING = Fraction(5, 4)


def _rng(seed: int) -> np.random.Generator:
    # counter-based bit generator: streams are reproducible and cheap to split
    return np.random.Generator(np.random.Philox(seed))


def gen_lower_bound(k: int, s: int, K: int) -> Instance:
    """s(k-1) goods worth K and s*k goods worth 1, one copy each, s*k identical agents.

    The greedy start pairs every K-good with a unit good, which is off from the
    optimum by (K/(K+1))^((k-1)/k) * k^(1/k).
    """
    if k < 1 or s < 1 or K < k:
        raise ValueError("need k >= 1, s >= 1 and K >= k")
    h = s * (k - 1)
    n = h + s
    values = [K] * h + [1] * n
    utils = [[[v] for v in values] for _ in range(n)]
    return make_instance(
        [1] * len(values), [None] * n, utils, meta={"family": "lower-bound", "k": k, "s": s, "K": K}
    )


def envy_unit(eps) -> Fraction:
    """Smallest power of r = 1+eps that is at least 2r^2."""
    eps = check_eps(eps)
    r = 1 + eps
    return next_power_up(2 * r * r, r).value


def gen_multicopy_envy(eps) -> Instance:
    """Two uncapped agents, good 1 with 5 copies and good 2 with 2 copies."""
    s = envy_unit(eps)
    utils = [
        [[s, s, 0, 0, 0], [1, 0]],
        [[s, s, s, 0, 0], [s, s]],
    ]
    return make_instance([5, 2], [None, None], utils, meta={"family": "multicopy-envy", "epsilon": str(eps)})


def gen_capped_envy(eps) -> Instance:
    """Two agents, four single goods all worth s; the first agent is capped at 3."""
    s = envy_unit(eps)
    utils = [[[s]] * 4, [[s]] * 4]
    return make_instance([1] * 4, [3, None], utils, meta={"family": "capped-envy", "epsilon": str(eps)})


def gen_random(
    n: int,
    m: int,
    max_copies: int,
    max_util: int,
    cap_mode: str = "none",
    seed: int = 0,
    min_util: int = 1,
) -> Instance:
    """Random instance: copies in [1, max_copies], per-copy utilities in [min_util, max_util].

    Utilities are drawn independently per copy and sorted descending per
    (agent, good).  With ``cap_mode="random"`` each agent is capped with
    probability 1/2, uniformly in [1, total utility].
    """
    if min(n, m, max_copies, max_util) < 1 or not 0 <= min_util <= max_util:
        raise ValueError("sizes must be positive and 0 <= min_util <= max_util")
    if cap_mode not in ("none", "random"):
        raise ValueError(f"unknown cap mode {cap_mode!r}")
    rng = _rng(seed)
    copies = [int(c) for c in rng.integers(1, max_copies + 1, size=m)]
    utils = []
    for _ in range(n):
        row = []
        for k in copies:
            draw = rng.integers(min_util, max_util + 1, size=k)
            row.append(sorted((int(u) for u in draw), reverse=True))
        utils.append(row)
    caps = [None] * n
    if cap_mode == "random":
        for i in range(n):
            total = sum(sum(seq) for seq in utils[i])
            if rng.random() < 0.5 and total >= 1:
                caps[i] = int(rng.integers(1, total + 1))
    meta = {
        "family": "random",
        "n": n,
        "m": m,
        "max_copies": max_copies,
        "max_util": max_util,
        "cap_mode": cap_mode,
        "seed": seed,
    }
    return make_instance(copies, caps, utils, meta=meta)


def delta_large_violations(inst: Instance, delta, slack=1) -> list[tuple[int, int, int]]:
    """(agent, good, copy) triples with slack * u > delta * u_i(G) / n (copies 1-based)."""
    delta, slack = as_rat(delta), as_rat(slack)
    bad = []
    for i in range(inst.n):
        total = sum(sum(seq) for seq in inst.utils[i])
        for j, seq in enumerate(inst.utils[i]):
            for ell, u in enumerate(seq, start=1):
                if slack * u * inst.n > delta * total:
                    bad.append((i, j, ell))
    return bad


def gen_delta_large(
    n: int,
    m: int,
    delta,
    seed: int = 0,
    max_copies: int = 1,
    max_util: int = 4,
    attempts: int = 1000,
) -> Instance:
    """Uncapped instance in which every item is worth at most delta/n of the agent's total.

    The condition is enforced with a 5/4 margin so it survives rounding to
    powers of 1+eps for any eps <= 1/4.  Violating agents are redrawn.
    """
    delta = as_rat(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    rng = _rng(seed)
    copies = [int(c) for c in rng.integers(1, max_copies + 1, size=m)]
    M = sum(copies)
    # with equal utilities an item is worth total/M, so M * delta >= n * margin is necessary
    if delta * M < n * _MAX_ROUNDING:
        raise ValueError(f"no delta-large instance with M={M}, n={n}, delta={delta}")

    def draw_agent():
        return [sorted((int(u) for u in rng.integers(1, max_util + 1, size=k)), reverse=True) for k in copies]

    utils = [draw_agent() for _ in range(n)]
    for _ in range(attempts):
        inst = Instance(tuple(copies), (None,) * n, tuple(tuple(tuple(s) for s in row) for row in utils))
        bad = {i for i, _, _ in delta_large_violations(inst, delta, _MAX_ROUNDING)}
        if not bad:
            break
        for i in sorted(bad):
            utils[i] = draw_agent()
    else:
        raise ValueError(f"could not draw a {delta}-large instance in {attempts} attempts")
    meta = {"family": "delta-large", "n": n, "m": m, "delta": str(delta), "seed": seed}
    out = make_instance(copies, [None] * n, utils, meta=meta)
    assert not delta_large_violations(out, delta, _MAX_ROUNDING)
    return out
