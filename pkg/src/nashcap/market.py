"""Market state: allocation, prices and MBB ratios tied together by the interval condition.

For every agent ``i`` and good ``j`` holding ``m`` copies::

    u[i][j][m+1] / p[j]  <=  alpha[i]  <=  u[i][j][m] / p[j]

with the upper bound read as +inf when ``m == 0`` and the lower bound as 0
when no further copy exists.  ``P_i = u_i(x_i) / alpha_i`` is the value of
agent ``i``'s bundle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .instance import Instance, RoundedInstance
from .numerics import INF


@dataclass(frozen=True)
class TightEdge:
    direction: str  # "agent->good" (lower bound tight) or "good->agent" (upper bound tight)
    agent: int
    good: int


@dataclass
class MarketState:
    inst: Instance
    mult: list[list[int]]
    price: list[Fraction]
    mbb: list[Fraction]
    active: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.active:
            if isinstance(self.inst, RoundedInstance):
                self.active = self.inst.active_copies
            else:
                self.active = tuple(self.inst.copies)

    @property
    def n(self) -> int:
        return self.inst.n

    @property
    def m(self) -> int:
        return self.inst.m

    def copy(self) -> "MarketState":
        return MarketState(
            self.inst,
            [row[:] for row in self.mult],
            self.price[:],
            self.mbb[:],
            self.active,
        )

    # -- utilities -------------------------------------------------------

    def util(self, i: int, j: int, ell: int):
        """u[i][j][ell] with 1-based ``ell``; zero past the last copy."""
        seq = self.inst.utils[i][j]
        return seq[ell - 1] if 1 <= ell <= len(seq) else 0

    def top_util(self, i: int, j: int):
        """Utility of the last copy of j that i holds (upper-bound numerator)."""
        return self.util(i, j, self.mult[i][j])

    def next_util(self, i: int, j: int):
        """Utility of the next copy of j for i (lower-bound numerator)."""
        return self.util(i, j, self.mult[i][j] + 1)

    def utility(self, i: int):
        return self.inst.bundle_utility(i, self.mult[i])

    def items(self, i: int) -> int:
        return sum(self.mult[i])

    def bundle(self, i: int) -> list[int]:
        """Goods present (at least one copy) in agent i's bundle."""
        return [j for j, c in enumerate(self.mult[i]) if c]

    def is_capped(self, i: int) -> bool:
        c = self.inst.caps[i]
        return c is not None and self.utility(i) >= c

    def full_allocation(self) -> list[list[int]]:
        """Multiplicities including spare copies nobody values (parked on agent 0)."""
        out = [row[:] for row in self.mult]
        for j, (k, a) in enumerate(zip(self.inst.copies, self.active)):
            out[0][j] += k - a
        return out


def market_from_allocation(inst: Instance, full_mult, prices, mbb) -> MarketState:
    """Rebuild a market state from a full allocation.

    Copies an agent holds past its last nonzero utility are dropped from the
    market view (they never change any value).
    """
    mult = []
    for i, row in enumerate(full_mult):
        pos = [sum(1 for u in inst.utils[i][j] if u > 0) for j in range(inst.m)]
        mult.append([min(c, p) for c, p in zip(row, pos)])
    active = tuple(sum(mult[i][j] for i in range(inst.n)) for j in range(inst.m))
    return MarketState(inst, mult, [Fraction(p) for p in prices], [Fraction(a) for a in mbb], active)


# -- bundle values ---------------------------------------------------------

def bundle_value(s: MarketState, i: int) -> Fraction:
    a = s.mbb[i]
    if a <= 0:
        raise AssertionError(f"MBB ratio of agent {i} is {a}; must be positive")
    return Fraction(s.utility(i)) / a


def bundle_value_minus_one(s: MarketState, k: int, j: int) -> Fraction:
    if s.mult[k][j] < 1:
        raise ValueError(f"agent {k} holds no copy of good {j}")
    return bundle_value(s, k) - Fraction(s.top_util(k, j)) / s.mbb[k]


def min_minus_one(s: MarketState, k: int) -> Optional[Fraction]:
    """min over goods j in x_k of P_k(x_k - j); None for an empty bundle."""
    goods = s.bundle(k)
    if not goods:
        return None
    total = bundle_value(s, k)
    return total - max(Fraction(s.top_util(k, j)) for j in goods) / s.mbb[k]


def is_capped_agent(s: MarketState, i: int) -> bool:
    return s.is_capped(i)


def uncapped_agents(s: MarketState) -> list[int]:
    return [i for i in range(s.n) if not s.is_capped(i)]


def least_spending_uncapped(s: MarketState, among=None) -> Optional[int]:
    best, best_val = None, None
    for i in range(s.n) if among is None else sorted(among):
        if s.is_capped(i):
            continue
        v = bundle_value(s, i)
        if best is None or v < best_val:
            best, best_val = i, v
    return best


def is_eps_p_ef1(s: MarketState, eps) -> tuple[bool, Optional[tuple[int, int]]]:
    """Price-envy-freeness up to one item.

    Returns ``(True, None)`` or ``(False, (i, k))`` where uncapped agent ``i``
    envies ``k`` even after dropping any single item from ``x_k``.
    """
    factor = 1 + Fraction(eps)
    worst = [min_minus_one(s, k) for k in range(s.n)]
    for i in range(s.n):
        if s.is_capped(i):
            continue
        limit = factor * bundle_value(s, i)
        for k in range(s.n):
            if k != i and worst[k] is not None and worst[k] > limit:
                return False, (i, k)
    return True, None


# -- tight graph -----------------------------------------------------------

def lower_tight(s: MarketState, i: int, j: int) -> bool:
    """alpha_i sits at its lower bound for (i, j): an extra copy of j costs nothing in MBB."""
    u = s.next_util(i, j)
    return u > 0 and s.price[j] > 0 and s.mbb[i] * s.price[j] == u


def upper_tight(s: MarketState, i: int, j: int) -> bool:
    """alpha_i sits at its upper bound for (i, j): i can give up a copy of j."""
    if s.mult[i][j] < 1 or s.price[j] <= 0:
        return False
    return s.mbb[i] * s.price[j] == s.top_util(i, j)


def goods_out(s: MarketState, i: int) -> list[int]:
    return [j for j in range(s.m) if lower_tight(s, i, j)]


def agents_in(s: MarketState, j: int) -> list[int]:
    return [k for k in range(s.n) if upper_tight(s, k, j)]


def tight_graph(s: MarketState) -> set[TightEdge]:
    edges = set()
    for i in range(s.n):
        for j in range(s.m):
            if lower_tight(s, i, j):
                edges.add(TightEdge("agent->good", i, j))
            if upper_tight(s, i, j):
                edges.add(TightEdge("good->agent", i, j))
    return edges


# -- invariant checks --------------------------------------------------------

def interval_violations(s: MarketState) -> list[tuple[int, int, str]]:
    """All (agent, good, side) pairs where the MBB interval condition fails."""
    bad = []
    for i in range(s.n):
        a = s.mbb[i]
        for j in range(s.m):
            p = s.price[j]
            if p <= 0:
                if s.active[j] > 0:
                    bad.append((i, j, "price"))
                continue
            if a * p < s.next_util(i, j):
                bad.append((i, j, "lower"))
            if s.mult[i][j] >= 1 and a * p > s.top_util(i, j):
                bad.append((i, j, "upper"))
    return bad


def conservation_violations(s: MarketState) -> list[int]:
    return [j for j in range(s.m) if sum(s.mult[i][j] for i in range(s.n)) != s.active[j]]


def welfare_exchange_violations(s: MarketState) -> list[tuple[int, int, int]]:
    """Triples (j, i, k) where moving a copy of j from i to k raises sum_i u_i/alpha_i."""
    bad = []
    for j in range(s.m):
        for i in range(s.n):
            if s.mult[i][j] < 1:
                continue
            give = Fraction(s.top_util(i, j)) / s.mbb[i]
            for k in range(s.n):
                if k != i and Fraction(s.next_util(k, j)) / s.mbb[k] > give:
                    bad.append((j, i, k))
    return bad


def snapshot(s: MarketState) -> MarketState:
    return s.copy()


__all__ = [
    "INF",
    "MarketState",
    "TightEdge",
    "agents_in",
    "bundle_value",
    "bundle_value_minus_one",
    "conservation_violations",
    "goods_out",
    "interval_violations",
    "is_capped_agent",
    "is_eps_p_ef1",
    "least_spending_uncapped",
    "lower_tight",
    "market_from_allocation",
    "min_minus_one",
    "snapshot",
    "tight_graph",
    "uncapped_agents",
    "upper_tight",
    "welfare_exchange_violations",
]
