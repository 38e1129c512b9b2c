"""Post-hoc certificates: EF1 verdicts, per-agent guarantees and upper bounds on the optimum."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .instance import Instance, RoundedInstance
from .market import MarketState, interval_violations, is_eps_p_ef1
from .numerics import INF, geometric_mean, rat_root_ratio, rat_to_json
from .solver import SolverOutput

RATIO_SLACK = 1e-9


class NotDeltaLarge(ValueError):
    def __init__(self, violations):
        self.violations = violations
        i, j, ell = violations[0]
        super().__init__(
            f"market is not delta-large: agent {i + 1}, good {j + 1}, copy {ell} is too valuable"
        )


def theoretical_factor(gamma) -> float:
    """exp(exp(-1/(1+gamma))), the NSW approximation factor for gamma-p-EF1 outputs."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return math.exp(math.exp(-1.0 / (1.0 + float(gamma))))


def nsw_nth_power(inst: Instance, allocation) -> Fraction:
    """prod_i min(c_i, u_i(x_i)), exact."""
    prod = Fraction(1)
    for i in range(inst.n):
        prod *= Fraction(inst.capped_utility(i, allocation[i]))
        if prod == 0:
            break
    return prod


def nsw(inst: Instance, allocation) -> float:
    return geometric_mean(nsw_nth_power(inst, allocation), inst.n)


# -- individual guarantee -------------------------------------------------------------

def individual_guarantee(output: SolverOutput):
    """Worst ratio min_j u_i(x_k - j) / u_i(x_i) over uncapped i and other agents k.

    Evaluated on the rounded instance the solver worked with.  Returns
    ``(ratio, (i, k))``; ratio 0 with witness None when no pair qualifies.
    A zero numerator counts as ratio 0 even when ``u_i(x_i) == 0``.
    """
    inst = output.instance
    alloc = output.allocation
    worst, witness = Fraction(0), None
    for i in range(inst.n):
        own = inst.bundle_utility(i, alloc[i])
        c = inst.caps[i]
        if c is not None and own >= c:
            continue
        for k in range(inst.n):
            if k == i or not any(alloc[k]):
                continue
            best = None
            for j, cnt in enumerate(alloc[k]):
                if cnt:
                    row = list(alloc[k])
                    row[j] -= 1
                    v = inst.bundle_utility(i, row)
                    best = v if best is None else min(best, v)
            if best == 0:
                ratio = Fraction(0)
            elif own == 0:
                ratio = INF
            else:
                ratio = Fraction(best) / own
            if witness is None or ratio > worst:
                worst, witness = ratio, (i, k)
    return worst, witness


# -- auxiliary-problem upper bound ---------------------------------------------------

@dataclass
class AuxiliaryBound:
    sorted_item_utils: list[Fraction]
    sorted_caps: list[Optional[Fraction]]  # None is an infinite cap
    h: int
    k: int
    delta: Optional[Fraction]
    bound_nth_power: Fraction  # in the scaled utilities
    scale: Fraction = Fraction(1)  # prod_i alpha_i

    @property
    def unscaled_nth_power(self) -> Fraction:
        """Bound on NSW^n in the solver's (unscaled, rounded) utilities."""
        return self.bound_nth_power * self.scale

    @property
    def n(self) -> int:
        return len(self.sorted_caps)


def auxiliary_bound(item_utils: Sequence, caps: Sequence) -> AuxiliaryBound:
    """Upper bound on the NSW^n of n agents with caps sharing single items of uniform value.

    Items 1..h (the largest) go whole to the agents with the largest caps,
    the k smallest caps are filled, and everybody else gets the level
    delta.  All (h, k) pairs meeting the side conditions are tried and the
    smallest bound is returned.
    """
    u = sorted((Fraction(x) for x in item_utils), reverse=True)
    n, M = len(caps), len(u)
    finite = sorted((Fraction(c) for c in caps if c is not None), reverse=True)
    cs: list[Optional[Fraction]] = [None] * (n - len(finite)) + finite

    def cap_lt(x, c):  # x < c with c possibly infinite
        return c is None or x < c

    suffix = [Fraction(0)] * (M + 1)
    for j in range(M - 1, -1, -1):
        suffix[j] = suffix[j + 1] + u[j]

    best: Optional[AuxiliaryBound] = None
    for k in range(len(finite) + 1):
        small = cs[n - k:] if k else []
        small_total = sum(small, Fraction(0))
        small_prod = math.prod(small, start=Fraction(1))
        for h in range(min(M, n - k - 1) + 1):
            free = n - h - k
            delta = (suffix[h] - small_total) / free
            if h >= 1 and not delta < u[h - 1]:
                continue
            if k >= 1 and not cs[n - k] <= delta:
                continue
            if not cap_lt(delta, cs[n - k - 1]):
                continue
            if h < M and not u[h] <= delta:
                continue
            top = Fraction(1)
            for i in range(h):
                top *= u[i] if cs[i] is None else min(cs[i], u[i])
            value = top * delta ** free * small_prod
            if best is None or value < best.bound_nth_power:
                best = AuxiliaryBound(u, cs, h, k, delta, value)
    if len(finite) == n:
        # every agent capped: prod of caps always bounds the optimum
        value = math.prod(finite, start=Fraction(1))
        if best is None or value < best.bound_nth_power:
            best = AuxiliaryBound(u, cs, 0, n, None, value)
    if best is None:
        raise AssertionError("no admissible (h, k) pair for the auxiliary bound")
    return best


def auxiliary_upper_bound(state) -> AuxiliaryBound:
    """Bound the optimum through the auxiliary problem built from a final market state.

    Each allocated copy becomes a single item worth its owner's utility divided
    by the owner's MBB ratio; caps are scaled the same way.  Accepts a
    :class:`MarketState` or a :class:`SolverOutput`.
    """
    if isinstance(state, SolverOutput):
        state = state.state
    inst = state.inst
    items, caps = [], []
    for i in range(inst.n):
        a = state.mbb[i]
        if a <= 0:
            raise ValueError(f"MBB ratio of agent {i} must be positive")
        for j in range(inst.m):
            for ell in range(state.mult[i][j]):
                items.append(Fraction(inst.utils[i][j][ell]) / a)
        c = inst.caps[i]
        caps.append(None if c is None else Fraction(c) / a)
    out = auxiliary_bound(items, caps)
    out.scale = math.prod(state.mbb, start=Fraction(1))
    return out


# -- BMV bound (single copies, no caps) ----------------------------------------------

def bmv_uniform_values(inst: Instance, alpha) -> list[Fraction]:
    return [max(Fraction(inst.utils[i][j][0]) / Fraction(alpha[i]) for i in range(inst.n)) for j in range(inst.m)]


def bmv_greedy_set(values: Sequence[Fraction], n: int, rng: Optional[random.Random] = None) -> frozenset:
    """Fixpoint of removing goods worth more than the per-agent share a(S).

    With ``rng`` the removal candidate is picked at random; the fixpoint is
    the same either way.
    """
    m = len(values)
    S = set(range(m))
    while True:
        size = n - (m - len(S))
        if size <= 0:
            break
        share = sum((values[j] for j in S), Fraction(0)) / size
        over = sorted(j for j in S if values[j] > share)
        if not over:
            break
        S.remove(rng.choice(over) if rng else over[0])
    return frozenset(S)


def bmv_bound(inst: Instance, alpha, rng: Optional[random.Random] = None) -> tuple[Fraction, frozenset]:
    """BMV upper bound (n-th power) for a fixed scaling vector ``alpha``."""
    if any(k != 1 for k in inst.copies) or any(c is not None for c in inst.caps):
        raise ValueError("the BMV bound needs single-copy goods and uncapped agents")
    values = bmv_uniform_values(inst, alpha)
    n, m = inst.n, inst.m
    S = bmv_greedy_set(values, n, rng)
    outside = [j for j in range(m) if j not in S]
    size = n - len(outside)
    share = sum((values[j] for j in S), Fraction(0)) / size if size > 0 else Fraction(0)
    bound = math.prod((values[j] for j in outside), start=Fraction(1)) * share ** size
    bound *= math.prod((Fraction(a) for a in alpha), start=Fraction(1))
    return bound, S


# -- large markets -------------------------------------------------------------------

@dataclass
class LargeMarketReport:
    welfare_bound: Fraction  # (sum_i u_i(x_i)/alpha_i / n)^n
    alg_scaled_nth_power: Fraction  # prod_i u_i(x_i)/alpha_i
    limit: Fraction  # (1+4eps)/(1-delta)
    ok: bool

    n: int

    @property
    def ratio(self) -> float:
        """n-th root of welfare_bound / alg, an upper bound on OPT/ALG."""
        return rat_root_ratio(self.welfare_bound, self.alg_scaled_nth_power, self.n)


def large_market_check(output: SolverOutput, delta) -> "LargeMarketReport":
    """Check the social-welfare bound against the guarantee (1+4eps)/(1-delta).

    The rounded instance must be uncapped and delta-large.
    """
    from .generators import delta_large_violations

    inst = output.instance
    delta = Fraction(delta)
    if any(c is not None for c in inst.caps):
        raise ValueError("large-market bound applies to uncapped instances only")
    bad = delta_large_violations(inst, delta)
    if bad:
        raise NotDeltaLarge(bad)
    s = output.state
    scaled = [Fraction(s.utility(i)) / s.mbb[i] for i in range(inst.n)]
    n = inst.n
    welfare = (sum(scaled, Fraction(0)) / n) ** n
    alg = math.prod(scaled, start=Fraction(1))
    limit = (1 + 4 * output.eps) / (1 - delta)
    return LargeMarketReport(welfare, alg, limit, welfare <= limit ** n * alg, n)


# -- certificate ---------------------------------------------------------------------

@dataclass
class Certificate:
    eps: Fraction
    ef1_ok: bool
    interval_ok: bool
    worst_individual_ratio: object
    individual_witness: Optional[tuple[int, int]]
    upper_bound_nth_power: Fraction
    alg_nsw_nth_power: Fraction
    ratio_nth_power: object
    theoretical_cap: float
    n: int
    aux: AuxiliaryBound
    alg_nsw_original: Optional[float] = None

    @property
    def ratio(self) -> float:
        return rat_root_ratio(self.upper_bound_nth_power, self.alg_nsw_nth_power, self.n)

    @property
    def individual_ok(self) -> bool:
        """Per-agent guarantee: min_j u_i(x_k - j) <= (2+4eps) u_i(x_i)."""
        return self.worst_individual_ratio <= 2 + 4 * self.eps

    @property
    def within_cap(self) -> bool:
        return self.ratio <= self.theoretical_cap + RATIO_SLACK

    @property
    def ok(self) -> bool:
        return self.ef1_ok and self.interval_ok and self.within_cap

    def to_dict(self) -> dict:
        wir = self.worst_individual_ratio
        return {
            "epsilon": rat_to_json(self.eps),
            "ef1_ok": self.ef1_ok,
            "interval_ok": self.interval_ok,
            "worst_individual_ratio": rat_to_json(wir),
            "individual_witness": list(self.individual_witness) if self.individual_witness else None,
            "individual_ok": self.individual_ok,
            "upper_bound_nth_power": rat_to_json(self.upper_bound_nth_power),
            "upper_bound": geometric_mean(self.upper_bound_nth_power, self.n),
            "alg_nsw_nth_power": rat_to_json(self.alg_nsw_nth_power),
            "alg_nsw": geometric_mean(self.alg_nsw_nth_power, self.n),
            "alg_nsw_original": self.alg_nsw_original,
            "ratio_nth_power": rat_to_json(self.ratio_nth_power),
            "ratio": self.ratio if math.isfinite(self.ratio) else None,
            "theoretical_cap": self.theoretical_cap,
            "within_cap": self.within_cap,
            "aux_h": self.aux.h,
            "aux_k": self.aux.k,
            "ok": self.ok,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def certify(inst: Optional[Instance], output: SolverOutput) -> Certificate:
    """Bundle every check on a solver output.

    Bounds and ratios refer to the rounded instance; the cap r*exp(exp(-1/(1+4eps)))
    already contains the rounding loss, so it also covers ``inst``.
    """
    eps = output.eps
    state = output.state
    rounded = output.instance
    ef1_ok, _ = is_eps_p_ef1(state, 4 * eps)
    interval_ok = not interval_violations(state)
    wir, witness = individual_guarantee(output)
    aux = auxiliary_upper_bound(state)
    ub = aux.unscaled_nth_power
    alg = nsw_nth_power(rounded, output.allocation)
    if alg > 0:
        ratio_n = ub / alg
    else:
        ratio_n = Fraction(1) if ub == 0 else INF
    cap = float(1 + eps) * theoretical_factor(4 * eps)
    orig = None
    if inst is not None and not isinstance(inst, RoundedInstance):
        orig = nsw(inst, output.allocation)
    return Certificate(eps, ef1_ok, interval_ok, wir, witness, ub, alg, ratio_n, cap, rounded.n, aux, orig)
