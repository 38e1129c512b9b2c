"""Brute-force ground truth for small instances."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterator, Optional, Sequence

from .instance import Instance

DEFAULT_MAX_STATES = 10 ** 8


class OracleTooLarge(ValueError):
    def __init__(self, states: int, limit: int):
        self.states, self.limit = states, limit
        super().__init__(f"state space has {states} allocations, above the limit of {limit}")


@dataclass
class OracleResult:
    best_nsw_nth_power: Fraction
    allocation: list[list[int]]
    optima: int
    states: int


def max_states() -> int:
    return int(os.environ.get("NSW_MAX_ORACLE_STATES", DEFAULT_MAX_STATES))


def state_space_size(inst: Instance) -> int:
    """Number of multiplicity assignments (copies of a good are interchangeable)."""
    n = inst.n
    return math.prod(math.comb(k + n - 1, n - 1) for k in inst.copies)


def compositions(k: int, n: int) -> Iterator[tuple[int, ...]]:
    """All ways to write k as an ordered sum of n non-negative integers."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, n - 1):
            yield (first,) + rest


def _common_denominator(inst: Instance) -> int:
    dens = [Fraction(u).denominator for row in inst.utils for seq in row for u in seq]
    dens += [Fraction(c).denominator for c in inst.caps if c is not None]
    return reduce(math.lcm, dens, 1)


def brute_force_opt(inst: Instance, limit: Optional[int] = None) -> OracleResult:
    """Exact maximum of prod_i min(c_i, u_i(x_i)) over all integral allocations."""
    limit = max_states() if limit is None else limit
    size = state_space_size(inst)
    if size > limit:
        raise OracleTooLarge(size, limit)

    n, m = inst.n, inst.m
    # integer arithmetic throughout; rescaling every utility by D scales the objective by D**n
    D = _common_denominator(inst)
    caps = [None if c is None else int(Fraction(c) * D) for c in inst.caps]
    prefix = [
        [[0] + _prefix_sums(int(Fraction(u) * D) for u in inst.utils[i][j]) for j in range(m)]
        for i in range(n)
    ]
    options = []
    for j in range(m):
        opts = []
        for comp in compositions(inst.copies[j], n):
            opts.append((comp, tuple(prefix[i][j][comp[i]] for i in range(n))))
        options.append(opts)

    best = -1
    best_alloc: list[tuple[int, ...]] = []
    count = 0
    chosen: list[tuple[int, ...]] = [()] * m
    acc = [0] * n

    def rec(j: int):
        nonlocal best, best_alloc, count
        if j == m:
            val = 1
            for i in range(n):
                u = acc[i] if caps[i] is None else min(caps[i], acc[i])
                val *= u
                if val == 0:
                    break
            if val > best:
                best, best_alloc, count = val, list(chosen), 1
            elif val == best:
                count += 1
            return
        for comp, gains in options[j]:
            chosen[j] = comp
            for i in range(n):
                acc[i] += gains[i]
            rec(j + 1)
            for i in range(n):
                acc[i] -= gains[i]

    rec(0)
    alloc = [[best_alloc[j][i] for j in range(m)] for i in range(n)]
    return OracleResult(Fraction(best, D ** n), alloc, count, size)


def _prefix_sums(values) -> list[int]:
    out, total = [], 0
    for v in values:
        total += v
        out.append(total)
    return out


def utility_of(inst: Instance, i: int, mult_row: Sequence[int]):
    return inst.bundle_utility(i, mult_row)


def is_utility_ef1(inst: Instance, allocation) -> tuple[bool, Optional[tuple[int, int]]]:
    """Envy-freeness up to one item in the agents' own (uncapped) utilities."""
    n = inst.n
    for i in range(n):
        own = inst.bundle_utility(i, allocation[i])
        for k in range(n):
            if k == i or not any(allocation[k]):
                continue
            best = None
            for j, c in enumerate(allocation[k]):
                if c == 0:
                    continue
                row = list(allocation[k])
                row[j] -= 1
                v = inst.bundle_utility(i, row)
                best = v if best is None else min(best, v)
            if best > own:
                return False, (i, k)
    return True, None
