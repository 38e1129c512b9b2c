"""Price-envy-free allocation algorithm for capped multi-copy utilities.

Greedy start, then repeat: if the allocation is eps-p-EF1 stop; otherwise take
the least spending uncapped agent, push items towards it along a shortest
improving path in the tight graph, or raise the prices of everything it can
reach when no such path exists.
"""
from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .instance import Instance, RoundedInstance, cap_and_round, check_eps, stats
from .market import (
    MarketState,
    agents_in,
    bundle_value,
    goods_out,
    is_eps_p_ef1,
    least_spending_uncapped,
    min_minus_one,
)
from .numerics import INF, floor_log_ratio, rat_from_json, rat_to_json

log = logging.getLogger(__name__)


class IterationCapExceeded(RuntimeError):
    """The loop ran past n³M²·log_r(MU) iterations, which the running-time bound rules out."""


@dataclass(frozen=True)
class ImprovingPath:
    agents: tuple[int, ...]  # a_0 .. a_h
    goods: tuple[int, ...]  # g_1 .. g_h

    @property
    def length(self) -> int:
        return len(self.goods)


@dataclass
class PriceStep:
    agents: frozenset
    goods: frozenset
    beta1: object
    beta2: object
    beta3: object
    beta4: object
    beta: object
    terminated: bool


@dataclass
class Event:
    """One main-loop iteration, handed to the ``observer`` callback of :func:`solve`."""

    kind: str  # "swap" or "price"
    least: int
    before: MarketState
    after: MarketState
    path: Optional[ImprovingPath] = None
    stop: Optional[int] = None  # h' of the swap sequence
    step: Optional[PriceStep] = None


@dataclass
class SolverOutput:
    state: MarketState
    eps: Fraction
    iterations: int = 0
    swap_sequences: int = 0
    moved_copies: int = 0
    price_increases: int = 0
    terminal: str = "ef1"  # "ef1", "beta3" or "stalled"
    price_steps: list[PriceStep] = field(default_factory=list)

    @property
    def instance(self) -> RoundedInstance:
        return self.state.inst

    @property
    def r(self) -> Fraction:
        return 1 + self.eps

    @property
    def allocation(self) -> list[list[int]]:
        return self.state.full_allocation()

    @property
    def prices(self) -> list[Fraction]:
        return self.state.price

    @property
    def mbb(self) -> list[Fraction]:
        return self.state.mbb


# -- initialisation --------------------------------------------------------------

def greedy_init(inst: RoundedInstance, tie_break: str = "fewest_items") -> MarketState:
    """Assign every copy to an agent with the largest marginal utility for it.

    Ties go to the agent currently holding the fewest items, then to the lowest
    index (``tie_break="lowest_index"`` skips the item count).  Each price is
    the marginal utility of the last copy handed out; all MBB ratios start at 1.
    """
    if tie_break not in ("fewest_items", "lowest_index"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    n, m = inst.n, inst.m
    active = inst.active_copies if isinstance(inst, RoundedInstance) else inst.copies
    mult = [[0] * m for _ in range(n)]
    held = [0] * n
    price = [Fraction(0)] * m
    for j in range(m):
        last = None
        for _ in range(active[j]):
            def key(i):
                c = mult[i][j]
                u = inst.utils[i][j][c] if c < inst.copies[j] else 0
                return (-u, held[i] if tie_break == "fewest_items" else 0, i)

            i0 = min(range(n), key=key)
            mult[i0][j] += 1
            held[i0] += 1
            last = i0
        if last is not None:
            price[j] = Fraction(inst.utils[last][j][mult[last][j] - 1])
    return MarketState(inst, mult, price, [Fraction(1)] * n, tuple(active))


# -- tight-graph search --------------------------------------------------------------

def find_improving_path(s: MarketState, i: int, eps) -> Optional[ImprovingPath]:
    """Shortest improving path from ``i`` by breadth-first search, or None.

    Agents are expanded in discovery order, goods and agents in index order,
    so the first violation found is the lexicographically smallest among the
    shortest ones.
    """
    limit = (1 + Fraction(eps)) * bundle_value(s, i)
    via_good: dict[int, int] = {}  # agent -> good it was reached through
    via_agent: dict[int, int] = {}  # good -> agent it was reached from
    seen_agents = {i}
    queue = deque([i])

    def trace(g: int):
        agents, goods = [], []
        while True:
            goods.append(g)
            a = via_agent[g]
            agents.append(a)
            if a == i:
                break
            g = via_good[a]
        return agents[::-1], goods[::-1]

    while queue:
        a = queue.popleft()
        for g in goods_out(s, a):
            if g in via_agent:
                continue
            via_agent[g] = a
            on_path = None
            for b in agents_in(s, g):
                if on_path is None:
                    on_path = set(trace(g)[0])
                if b in on_path:
                    continue
                after = bundle_value(s, b) - Fraction(s.top_util(b, g)) / s.mbb[b]
                if after > limit:
                    agents, goods = trace(g)
                    return ImprovingPath(tuple(agents + [b]), tuple(goods))
                if b not in seen_agents:
                    seen_agents.add(b)
                    via_good[b] = g
                    queue.append(b)
    return None


def reachable_set(s: MarketState, i: int) -> tuple[frozenset, frozenset]:
    """Agents and goods reachable from ``i`` in the tight graph."""
    agents, goods = {i}, set()
    queue = deque([i])
    while queue:
        a = queue.popleft()
        for g in goods_out(s, a):
            if g in goods:
                continue
            goods.add(g)
            for b in agents_in(s, g):
                if b not in agents:
                    agents.add(b)
                    queue.append(b)
    return frozenset(agents), frozenset(goods)


def execute_swaps(s: MarketState, path: ImprovingPath, eps) -> int:
    """Move copies backwards along ``path`` until an agent is no longer envied.

    Mutates ``s`` and returns h', the index of the last agent that received an
    item without giving one up.
    """
    i = path.agents[0]
    limit = (1 + Fraction(eps)) * bundle_value(s, i)
    ell = path.length
    while ell > 0:
        a, g = path.agents[ell], path.goods[ell - 1]
        after = bundle_value(s, a) - Fraction(s.top_util(a, g)) / s.mbb[a]
        if after <= limit:
            break
        s.mult[a][g] -= 1
        s.mult[path.agents[ell - 1]][g] += 1
        ell -= 1
    return ell


# -- price increase ---------------------------------------------------------------

def price_increase(s: MarketState, i: int, eps) -> PriceStep:
    """Raise prices of goods reachable from ``i`` and lower MBB ratios of reachable agents.

    Mutates ``s`` unless no limiting event is finite (the caller then stops).
    """
    r = 1 + Fraction(eps)
    S_agents, S_goods = reachable_set(s, i)
    out_agents = [k for k in range(s.n) if k not in S_agents]

    beta1 = INF
    for k in sorted(S_agents):
        for j in range(s.m):
            if j in S_goods or s.price[j] <= 0:
                continue
            u = s.next_util(k, j)
            if u > 0:
                beta1 = min(beta1, s.mbb[k] * s.price[j] / u)

    beta2 = INF
    for k in out_agents:
        for j in sorted(S_goods):
            if s.mult[k][j] >= 1:
                beta2 = min(beta2, Fraction(s.top_util(k, j)) / (s.price[j] * s.mbb[k]))

    P_i = bundle_value(s, i)
    if P_i == 0:
        beta3 = beta4 = INF
    else:
        worst = [w for k in out_agents if (w := min_minus_one(s, k)) is not None]
        beta3 = max(worst) / (r * r * P_i) if worst else Fraction(0)
        h = least_spending_uncapped(s, among=out_agents)
        beta4 = INF if h is None else r ** floor_log_ratio(bundle_value(s, h) / P_i, r)

    beta = min(beta1, beta2, max(Fraction(1), beta3), beta4)
    terminated = beta3 <= min(beta1, beta2, beta4)
    if beta != INF:
        for j in S_goods:
            s.price[j] *= beta
        for k in S_agents:
            s.mbb[k] /= beta
    return PriceStep(S_agents, S_goods, beta1, beta2, beta3, beta4, beta, terminated)


# -- driver -----------------------------------------------------------------------

def solve(
    inst: Instance,
    eps,
    *,
    tie_break: str = "fewest_items",
    observer: Optional[Callable[[Event], None]] = None,
    enforce_cap: bool = True,
) -> SolverOutput:
    """Run the algorithm on ``inst`` with approximation parameter ``eps``.

    The returned state is 4*eps-p-EF1 unless ``terminal == "stalled"``, which
    only happens when no allocation gives every agent positive utility.
    """
    eps = check_eps(eps)
    rounded = inst if isinstance(inst, RoundedInstance) and inst.eps == eps else cap_and_round(inst, eps)
    cap = stats(rounded).iteration_cap
    s = greedy_init(rounded, tie_break)
    out = SolverOutput(s, eps)

    while True:
        ok, _ = is_eps_p_ef1(s, eps)
        if ok:
            out.terminal = "ef1"
            break
        if enforce_cap and out.iterations >= cap:
            raise IterationCapExceeded(
                f"{out.iterations} iterations reached the cap {cap} (n={rounded.n}, M={rounded.M})"
            )
        i = least_spending_uncapped(s)
        before = s.copy() if observer else None
        out.iterations += 1
        path = find_improving_path(s, i, eps)
        if path is not None:
            stop = execute_swaps(s, path, eps)
            out.swap_sequences += 1
            out.moved_copies += path.length - stop
            if observer:
                observer(Event("swap", i, before, s.copy(), path=path, stop=stop))
            continue
        step = price_increase(s, i, eps)
        out.price_steps.append(step)
        if step.beta == INF:
            # nothing can grow and the least spender has nothing of value
            out.terminal = "stalled"
            log.warning("price step has no finite limit; stopping with a zero-value agent")
            break
        out.price_increases += 1
        if observer:
            observer(Event("price", i, before, s.copy(), step=step))
        if step.terminated:
            out.terminal = "beta3"
            break
    return out


# -- JSON ---------------------------------------------------------------------------

def output_to_dict(out: SolverOutput) -> dict:
    return {
        "epsilon": rat_to_json(out.eps),
        "allocation": out.allocation,
        "prices": [rat_to_json(p) for p in out.prices],
        "mbb": [rat_to_json(a) for a in out.mbb],
        "iterations": out.iterations,
        "swap_sequences": out.swap_sequences,
        "moved_copies": out.moved_copies,
        "price_increases": out.price_increases,
        "terminal": out.terminal,
    }


def dumps_output(out: SolverOutput) -> str:
    return json.dumps(output_to_dict(out), indent=1)


def solution_from_dict(obj: dict) -> tuple[Fraction, list[list[int]], list, list]:
    """Parse (epsilon, allocation, prices, mbb) from solution JSON."""
    eps = rat_from_json(obj["epsilon"])
    alloc = [[int(c) for c in row] for row in obj["allocation"]]
    prices = [rat_from_json(p) for p in obj["prices"]]
    mbb = [rat_from_json(a) for a in obj["mbb"]]
    return eps, alloc, prices, mbb
